#pragma once

#include <vector>

#include "amppi/perception.hpp"
#include "amppi/types.hpp"

namespace amppi {

struct AnchorGrid {
  int m_h{5};                       // horizontal (azimuth) anchor count
  int m_v{3};                       // vertical (elevation) anchor count
  double lookahead{5.0};            // m
  double spacing_deg{18.0};         // one coarse cell per anchor
  double terminal_speed{3.0};       // guide end-velocity magnitude, m/s
  double min_anchor_distance{0.5};  // m, keeps anchors off the vehicle

  int count() const { return m_h * m_v; }
};

struct Anchor {
  Vec3 initial_endpoint{Vec3::Zero()};  // cell-center ray at lookahead range
  Vec3 refined_endpoint{Vec3::Zero()};
  Vec3 safe_dir{Vec3::UnitX()};  // world frame, unit
  double safe_range{0.0};
  int coarse_i{0};
  int coarse_j{0};
};

struct BoundaryCondition {
  Vec3 p{Vec3::Zero()};
  Vec3 v{Vec3::Zero()};
  Vec3 a{Vec3::Zero()};
};

// Three fifth-order polynomials, one per axis: row * (1, t, ..., t^5).
struct GuidingTrajectory {
  Eigen::Matrix<double, 3, 6> coeffs{Eigen::Matrix<double, 3, 6>::Zero()};
  double horizon{0.0};  // s
};

/// m_h x m_v endpoints at the look-ahead distance, offset from the goal
/// direction in azimuth/elevation steps of spacing_deg; elevation clamped
/// to ±89°. Throws "degenerate goal direction" when goal coincides with p0.
std::vector<Vec3> sample_initial_endpoints(const Vec3& p0, const Vec3& goal,
                                           const AnchorGrid& grid);

/// Re-aligns each endpoint to its coarse cell's safe direction:
/// distance = min(lookahead, max(safe_range - obstacle_shell, min_distance)).
/// The pose supplies the body frame the partition was built in.
std::vector<Anchor> refine_endpoints(const std::vector<Vec3>& endpoints,
                                     const CoarsePartition& coarse,
                                     const State& pose, double lookahead,
                                     double obstacle_shell,
                                     double min_distance = 0.5);

/// Closed-form quintic through position/velocity/acceleration boundary
/// conditions; throws when the horizon is not positive.
GuidingTrajectory solve_quintic(const BoundaryCondition& start,
                                const BoundaryCondition& end, double horizon);

/// Position at time t (clamped to [0, horizon]).
Vec3 eval_guide(const GuidingTrajectory& g, double t);
Vec3 eval_guide_velocity(const GuidingTrajectory& g, double t);
Vec3 eval_guide_acceleration(const GuidingTrajectory& g, double t);

/// One guide per anchor: starts at the current state (acceleration
/// reconstructed from the last applied control), ends at the refined
/// endpoint moving at terminal_speed along the safe direction.
std::vector<GuidingTrajectory> build_guides(const std::vector<Anchor>& anchors,
                                            const State& x,
                                            const ControlInput& last_control,
                                            const DynamicsParams& prm,
                                            double terminal_speed,
                                            double horizon);

}  // namespace amppi
