#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>

namespace amppi {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Quat = Eigen::Quaterniond;

inline Vec4 quat_vec(const Quat& q) { return Vec4(q.w(), q.x(), q.y(), q.z()); }
inline Quat vec_quat(const Vec4& v) { return Quat(v[0], v[1], v[2], v[3]); }

// Vehicle state x = [p, q, v]: world-frame position and velocity plus a
// unit attitude quaternion (scalar-first wherever components are listed).
struct State {
  Vec3 p{Vec3::Zero()};
  Quat q{Quat::Identity()};
  Vec3 v{Vec3::Zero()};

  bool finite() const {
    return p.allFinite() && v.allFinite() && q.coeffs().allFinite();
  }
};

// Collective thrust [N] plus body rates [rad/s].
struct ControlInput {
  double thrust{0.0};
  Vec3 omega{Vec3::Zero()};

  Vec4 vec() const { return Vec4(thrust, omega.x(), omega.y(), omega.z()); }
  static ControlInput from_vec(const Vec4& u) {
    return ControlInput{u[0], Vec3(u[1], u[2], u[3])};
  }
  bool finite() const { return std::isfinite(thrust) && omega.allFinite(); }
};

struct DynamicsParams {
  double mass{1.0};               // kg
  Vec3 gravity{0.0, 0.0, -9.81};  // m/s^2
  double dt{0.05};                // integration step, s
  double thrust_min{0.3};         // N
  double thrust_max{16.35};       // N
  double omega_xy_max{3.0};       // rad/s
  double omega_z_max{2.0};        // rad/s

  // Thrust that exactly cancels gravity at level attitude.
  ControlInput hover() const {
    return ControlInput{mass * gravity.norm(), Vec3::Zero()};
  }
};

struct StateDerivative {
  Vec3 dp{Vec3::Zero()};
  Vec4 dq{Vec4::Zero()};  // scalar-first (w, x, y, z)
  Vec3 dv{Vec3::Zero()};
};

}  // namespace amppi
