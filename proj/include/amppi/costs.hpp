#pragma once

#include <cmath>
#include <vector>

#include "amppi/guidance.hpp"
#include "amppi/perception.hpp"
#include "amppi/types.hpp"

namespace amppi {

// Piecewise-exponential collision penalty parameters.
struct CollisionParams {
  double scale{1.0e6};  // C
  double slope{5.0};    // a, 1/m
  double d_min{0.4};    // m
  double d_max{1.0};    // m
};

struct CostWeights {
  double q_track{15.0};
  double q_vnorm{0.15};
  double q_c{0.5};
  double q_c_delta{0.5};
  double q_p{3.0};
  double q_v{0.25};
  double q_q{1.0};
  CollisionParams collision;
};

// One simulated trajectory over the horizon: N+1 states, N controls.
struct Rollout {
  std::vector<State> states;
  std::vector<ControlInput> controls;
  const GuidingTrajectory* guide{nullptr};
  double dt{0.05};
  bool valid{true};

  int horizon() const { return static_cast<int>(controls.size()); }
};

struct GoalSpec {
  Vec3 p_goal{Vec3::Zero()};
  Vec3 v_goal{Vec3::Zero()};
  Quat q_goal{Quat::Identity()};

  // Level attitude yawed toward the target.
  static GoalSpec facing(const Vec3& from, const Vec3& target) {
    GoalSpec g;
    g.p_goal = target;
    const Vec3 d = target - from;
    if (d.head<2>().squaredNorm() > 1e-12)
      g.q_goal = Quat(Eigen::AngleAxisd(std::atan2(d.y(), d.x()), Vec3::UnitZ()));
    return g;
  }
};

/// Σ q_track ‖p_t − p_guide(t·dt)‖ over t = 0..N−1 (unsquared norm).
inline double tracking_cost(const Rollout& r, const CostWeights& w) {
  if (r.guide == nullptr) return 0.0;
  double sum = 0.0;
  const int n = r.horizon();
  for (int t = 0; t < n; ++t)
    sum += (r.states[t].p - eval_guide(*r.guide, t * r.dt)).norm();
  return w.q_track * sum;
}

/// Σ q_vnorm ‖v_t‖² over t = 0..N−1.
inline double vnorm_cost(const Rollout& r, const CostWeights& w) {
  double sum = 0.0;
  const int n = r.horizon();
  for (int t = 0; t < n; ++t) sum += r.states[t].v.squaredNorm();
  return w.q_vnorm * sum;
}

/// Σ_{t=0}^{N−2} q_c ‖u_t‖² + Σ_{t=1}^{N−2} q_cΔ ‖u_t − u_{t−1}‖² with u the
/// 4-vector (F_t, ω). u_prev is the control applied in the previous cycle;
/// it does not enter the stated index ranges and is kept for callers that
/// track it alongside the rollout.
inline double control_cost(const Rollout& r, const CostWeights& w,
                           const ControlInput& u_prev) {
  (void)u_prev;
  double magnitude = 0.0;
  double rate = 0.0;
  const int n = r.horizon();
  for (int t = 0; t + 1 < n; ++t) {
    magnitude += r.controls[t].vec().squaredNorm();
    if (t >= 1)
      rate += (r.controls[t].vec() - r.controls[t - 1].vec()).squaredNorm();
  }
  return w.q_c * magnitude + w.q_c_delta * rate;
}

/// Σ [ q_p ‖p_t − p_goal‖ + q_v ‖v_t − v_goal‖ + q_q ‖R(q_t)R(q_goal)ᵀ − I‖_F ]
/// over t = 0..N−1.
inline double goal_cost(const Rollout& r, const GoalSpec& goal,
                        const CostWeights& w) {
  const Eigen::Matrix3d goal_rot_t = goal.q_goal.toRotationMatrix().transpose();
  double sum = 0.0;
  const int n = r.horizon();
  for (int t = 0; t < n; ++t) {
    const State& x = r.states[t];
    sum += w.q_p * (x.p - goal.p_goal).norm();
    sum += w.q_v * (x.v - goal.v_goal).norm();
    const Eigen::Matrix3d err =
        x.q.toRotationMatrix() * goal_rot_t - Eigen::Matrix3d::Identity();
    sum += w.q_q * err.norm();
  }
  return sum;
}

/// C below d_min, C·exp(−a(d − d_min)) inside the shell, 0 from d_max on.
inline double collision_term(double d, const CostWeights& w) {
  const CollisionParams& c = w.collision;
  if (d < c.d_min) return c.scale;
  if (d < c.d_max) return c.scale * std::exp(-c.slope * (d - c.d_min));
  return 0.0;
}

inline double collision_cost(const Rollout& r, const FilteredCloud& filtered,
                             const CostWeights& w) {
  double sum = 0.0;
  const int n = r.horizon();
  for (int t = 0; t < n; ++t)
    sum += collision_term(clearance(filtered, r.states[t].p), w);
  return sum;
}

inline double collision_cost(const Rollout& r, const ClearanceIndex& index,
                             const CostWeights& w) {
  double sum = 0.0;
  const int n = r.horizon();
  for (int t = 0; t < n; ++t)
    sum += collision_term(index.nearest(r.states[t].p), w);
  return sum;
}

// Stage-II simplified cost: goal reaching plus collision avoidance.
inline double stage2_cost(const Rollout& r, const GoalSpec& goal,
                          const ClearanceIndex& index, const CostWeights& w) {
  return goal_cost(r, goal, w) + collision_cost(r, index, w);
}

inline double stage2_cost(const Rollout& r, const GoalSpec& goal,
                          const FilteredCloud& filtered, const CostWeights& w) {
  return goal_cost(r, goal, w) + collision_cost(r, filtered, w);
}

// Stage-I composite cost: tracking + velocity + control + stage II.
inline double stage1_cost(const Rollout& r, const GoalSpec& goal,
                          const ClearanceIndex& index, const CostWeights& w,
                          const ControlInput& u_prev) {
  return tracking_cost(r, w) + vnorm_cost(r, w) + control_cost(r, w, u_prev) +
         stage2_cost(r, goal, index, w);
}

inline double stage1_cost(const Rollout& r, const GoalSpec& goal,
                          const FilteredCloud& filtered, const CostWeights& w,
                          const ControlInput& u_prev) {
  return tracking_cost(r, w) + vnorm_cost(r, w) + control_cost(r, w, u_prev) +
         stage2_cost(r, goal, filtered, w);
}

// Named terms of the winner rollout, recorded in the trajectory log.
struct CostBreakdown {
  double track{0.0};
  double vnorm{0.0};
  double ctrl{0.0};
  double goal{0.0};
  double collision{0.0};

  double stage2() const { return goal + collision; }
  double stage1() const { return track + vnorm + ctrl + stage2(); }
};

inline CostBreakdown cost_breakdown(const Rollout& r, const GoalSpec& goal,
                                    const ClearanceIndex& index,
                                    const CostWeights& w,
                                    const ControlInput& u_prev) {
  CostBreakdown b;
  b.track = tracking_cost(r, w);
  b.vnorm = vnorm_cost(r, w);
  b.ctrl = control_cost(r, w, u_prev);
  b.goal = goal_cost(r, goal, w);
  b.collision = collision_cost(r, index, w);
  return b;
}

}  // namespace amppi
