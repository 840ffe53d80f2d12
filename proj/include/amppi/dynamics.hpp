#pragma once

#include <algorithm>
#include <stdexcept>

#include "amppi/types.hpp"

namespace amppi {
namespace detail {

// Rigid-body CTBR model. Tolerates the slightly non-unit quaternions that
// RK4 stage states carry; the thrust rotation uses a normalized copy.
inline StateDerivative derivative_raw(const State& x, const ControlInput& u,
                                      const DynamicsParams& prm) {
  StateDerivative d;
  d.dp = x.v;
  const Quat omega_q(0.0, u.omega.x(), u.omega.y(), u.omega.z());
  const Quat qdot = x.q * omega_q;  // Hamilton product q ⊗ [0, ω]
  d.dq = 0.5 * quat_vec(qdot);
  d.dv = (u.thrust / prm.mass) * (x.q.normalized() * Vec3::UnitZ()) + prm.gravity;
  return d;
}

// Classic RK4 with the quaternion treated as a plain R^4 block and the
// control held constant over the step; no final renormalization.
inline State rk4_step_raw(const State& x, const ControlInput& u,
                          const DynamicsParams& prm) {
  const double dt = prm.dt;
  auto advance = [](const State& s, const StateDerivative& d, double h) {
    State out;
    out.p = s.p + h * d.dp;
    out.v = s.v + h * d.dv;
    out.q = vec_quat(quat_vec(s.q) + h * d.dq);
    return out;
  };

  const StateDerivative k1 = derivative_raw(x, u, prm);
  const StateDerivative k2 = derivative_raw(advance(x, k1, 0.5 * dt), u, prm);
  const StateDerivative k3 = derivative_raw(advance(x, k2, 0.5 * dt), u, prm);
  const StateDerivative k4 = derivative_raw(advance(x, k3, dt), u, prm);

  State next;
  next.p = x.p + (dt / 6.0) * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
  next.v = x.v + (dt / 6.0) * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
  next.q = vec_quat(quat_vec(x.q) +
                    (dt / 6.0) * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq));
  return next;
}

}  // namespace detail

/// Continuous dynamics: ṗ = v, q̇ = ½ q ⊗ [0, ω], v̇ = R(q)·[0,0,F_t]/m + g.
inline StateDerivative state_derivative(const State& x, const ControlInput& u,
                                        const DynamicsParams& prm) {
  if (!x.finite() || !u.finite()) throw std::invalid_argument("invalid state");
  return detail::derivative_raw(x, u, prm);
}

/// One discrete step: classic RK4 over dt with zero-order-hold control,
/// quaternion renormalized afterward.
inline State rk4_step(const State& x, const ControlInput& u,
                      const DynamicsParams& prm) {
  if (!x.finite() || !u.finite()) throw std::invalid_argument("invalid state");
  State next = detail::rk4_step_raw(x, u, prm);
  next.q.normalize();
  return next;
}

/// Componentwise saturation to the actuation limits.
inline ControlInput clamp_control(const ControlInput& u,
                                  const DynamicsParams& prm) {
  ControlInput c;
  c.thrust = std::clamp(u.thrust, prm.thrust_min, prm.thrust_max);
  c.omega.x() = std::clamp(u.omega.x(), -prm.omega_xy_max, prm.omega_xy_max);
  c.omega.y() = std::clamp(u.omega.y(), -prm.omega_xy_max, prm.omega_xy_max);
  c.omega.z() = std::clamp(u.omega.z(), -prm.omega_z_max, prm.omega_z_max);
  return c;
}

}  // namespace amppi
