#include "amppi/guidance.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "amppi/dynamics.hpp"

namespace amppi {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kMaxElevation = 89.0 * kPi / 180.0;
}  // namespace

std::vector<Vec3> sample_initial_endpoints(const Vec3& p0, const Vec3& goal,
                                           const AnchorGrid& grid) {
  const Vec3 to_goal = goal - p0;
  const double dist = to_goal.norm();
  if (!(dist > 1e-9)) throw std::invalid_argument("degenerate goal direction");

  const double az0 = std::atan2(to_goal.y(), to_goal.x());
  const double el0 = std::atan2(
      to_goal.z(), std::sqrt(to_goal.x() * to_goal.x() + to_goal.y() * to_goal.y()));
  const double spacing = grid.spacing_deg * kPi / 180.0;

  std::vector<Vec3> endpoints;
  endpoints.reserve(grid.count());
  for (int v = 0; v < grid.m_v; ++v) {
    const double el_off = (v - 0.5 * (grid.m_v - 1)) * spacing;
    const double el = std::clamp(el0 + el_off, -kMaxElevation, kMaxElevation);
    for (int h = 0; h < grid.m_h; ++h) {
      const double az = az0 + (h - 0.5 * (grid.m_h - 1)) * spacing;
      endpoints.push_back(p0 + grid.lookahead * direction_from_angles(az, el));
    }
  }
  return endpoints;
}

std::vector<Anchor> refine_endpoints(const std::vector<Vec3>& endpoints,
                                     const CoarsePartition& coarse,
                                     const State& pose, double lookahead,
                                     double obstacle_shell,
                                     double min_distance) {
  std::vector<Anchor> anchors;
  anchors.reserve(endpoints.size());
  const Eigen::Matrix3d body_to_world = pose.q.toRotationMatrix();
  const Eigen::Matrix3d world_to_body = body_to_world.transpose();

  for (const auto& endpoint : endpoints) {
    Vec3 dir_world = endpoint - pose.p;
    if (dir_world.squaredNorm() < 1e-18) dir_world = Vec3::UnitX();
    const Vec3 dir_body = world_to_body * dir_world.normalized();
    const double az = std::atan2(dir_body.y(), dir_body.x());
    const double el = std::atan2(
        dir_body.z(),
        std::sqrt(dir_body.x() * dir_body.x() + dir_body.y() * dir_body.y()));

    Anchor a;
    a.initial_endpoint = endpoint;
    a.coarse_i = coarse_azimuth_cell(az);
    a.coarse_j = coarse_elevation_cell(el);
    const int f = CoarsePartition::flat(a.coarse_i, a.coarse_j);
    a.safe_range = coarse.safe_range(a.coarse_i, a.coarse_j);
    a.safe_dir = body_to_world * coarse.safe_dir[f];
    const double reach = std::min(
        lookahead, std::max(a.safe_range - obstacle_shell, min_distance));
    a.refined_endpoint = pose.p + reach * a.safe_dir;
    anchors.push_back(a);
  }
  return anchors;
}

GuidingTrajectory solve_quintic(const BoundaryCondition& start,
                                const BoundaryCondition& end, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  const double T = horizon;
  const double T2 = T * T, T3 = T2 * T, T4 = T3 * T, T5 = T4 * T;

  // residuals after the free flight implied by the start conditions
  const Vec3 dp = end.p - (start.p + start.v * T + 0.5 * start.a * T2);
  const Vec3 dv = end.v - (start.v + start.a * T);
  const Vec3 da = end.a - start.a;

  GuidingTrajectory g;
  g.horizon = T;
  g.coeffs.col(0) = start.p;
  g.coeffs.col(1) = start.v;
  g.coeffs.col(2) = 0.5 * start.a;
  g.coeffs.col(3) = (20.0 * dp - 8.0 * T * dv + T2 * da) / (2.0 * T3);
  g.coeffs.col(4) = (-30.0 * dp + 14.0 * T * dv - 2.0 * T2 * da) / (2.0 * T4);
  g.coeffs.col(5) = (12.0 * dp - 6.0 * T * dv + T2 * da) / (2.0 * T5);
  return g;
}

Vec3 eval_guide(const GuidingTrajectory& g, double t) {
  t = std::clamp(t, 0.0, g.horizon);
  Vec3 out = g.coeffs.col(5);
  for (int k = 4; k >= 0; --k) out = out * t + g.coeffs.col(k);
  return out;
}

Vec3 eval_guide_velocity(const GuidingTrajectory& g, double t) {
  t = std::clamp(t, 0.0, g.horizon);
  Vec3 out = 5.0 * g.coeffs.col(5);
  for (int k = 4; k >= 1; --k) out = out * t + k * g.coeffs.col(k);
  return out;
}

Vec3 eval_guide_acceleration(const GuidingTrajectory& g, double t) {
  t = std::clamp(t, 0.0, g.horizon);
  Vec3 out = 20.0 * g.coeffs.col(5);
  out = out * t + 12.0 * g.coeffs.col(4);
  out = out * t + 6.0 * g.coeffs.col(3);
  out = out * t + 2.0 * g.coeffs.col(2);
  return out;
}

std::vector<GuidingTrajectory> build_guides(const std::vector<Anchor>& anchors,
                                            const State& x,
                                            const ControlInput& last_control,
                                            const DynamicsParams& prm,
                                            double terminal_speed,
                                            double horizon) {
  BoundaryCondition start;
  start.p = x.p;
  start.v = x.v;
  start.a = detail::derivative_raw(x, clamp_control(last_control, prm), prm).dv;

  std::vector<GuidingTrajectory> guides;
  guides.reserve(anchors.size());
  for (const auto& anchor : anchors) {
    BoundaryCondition end;
    end.p = anchor.refined_endpoint;
    end.v = terminal_speed * anchor.safe_dir;
    end.a = Vec3::Zero();
    guides.push_back(solve_quintic(start, end, horizon));
  }
  return guides;
}

}  // namespace amppi
