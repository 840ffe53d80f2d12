#include "amppi/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "amppi/parallel.hpp"

namespace amppi {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void PlanScratch::resize(int instances, const MppiConfig& cfg) {
  const std::size_t mk = static_cast<std::size_t>(instances) * cfg.rollouts;
  perturbations.resize(mk * cfg.horizon);
  trajectories.resize(mk);
  costs.resize(mk);
  slice_weights.resize(cfg.rollouts);
  zero_deltas.resize(static_cast<std::size_t>(instances) * cfg.horizon);
  re_rollouts.resize(instances);
}

PlanResult plan_step(const State& x, const GoalSpec& goal,
                     const PerceptionSnapshot& snap, const EnsembleConfig& cfg,
                     const NominalSequence& previous,
                     const ControlInput& last_applied, std::uint64_t cycle,
                     std::uint64_t seed, PlanScratch& scratch) {
  const int m_count = cfg.grid.count();
  const int k_count = cfg.mppi.rollouts;
  const int n = cfg.mppi.horizon;
  const double horizon_s = n * cfg.mppi.dt;
  scratch.resize(m_count, cfg.mppi);

  PlanResult result;

  // anchors and guides; near the goal the look-ahead and terminal speed
  // shrink so the guides settle on the goal instead of flying through it
  AnchorGrid grid = cfg.grid;
  const double goal_dist = (goal.p_goal - x.p).norm();
  if (goal_dist > grid.min_anchor_distance) {
    grid.lookahead = std::min(grid.lookahead, goal_dist);
    const double terminal_speed =
        std::min(grid.terminal_speed, goal_dist / horizon_s);
    result.anchors = refine_endpoints(
        sample_initial_endpoints(x.p, goal.p_goal, grid), snap.coarse,
        snap.pose, grid.lookahead, cfg.weights.collision.d_max,
        grid.min_anchor_distance);
    result.guides = build_guides(result.anchors, x, last_applied, cfg.dynamics,
                                 terminal_speed, horizon_s);
  } else {
    // inside the anchor floor: every guide settles on the goal at rest
    Anchor hold;
    hold.initial_endpoint = goal.p_goal;
    hold.refined_endpoint = goal.p_goal;
    hold.safe_dir = x.q * Vec3::UnitX();
    hold.safe_range = snap.partition.r_max;
    result.anchors.assign(m_count, hold);
    result.guides = build_guides(result.anchors, x, last_applied, cfg.dynamics,
                                 0.0, horizon_s);
  }

  // every instance warm-starts from the shifted previous winner nominal
  NominalSequence warm;
  if (static_cast<int>(previous.controls.size()) == n)
    warm = shift_nominal(previous);
  else
    warm = NominalSequence::constant(cfg.dynamics.hover(), n);

  result.per_instance.assign(m_count, InstanceRecord{});
  std::vector<NominalSequence> nominals(m_count, warm);
  std::vector<std::uint8_t> alive(m_count, 1);

  // stage I: per-instance MPPI updates against the per-instance guides
  for (int iter = 0; iter < cfg.mppi.iterations; ++iter) {
    const std::uint64_t iter_cycle =
        cycle * static_cast<std::uint64_t>(cfg.mppi.iterations) + iter;
    parallel_for(static_cast<std::size_t>(m_count) * k_count,
                 [&](std::size_t begin, std::size_t end) {
                   for (std::size_t idx = begin; idx < end; ++idx) {
                     const int m = static_cast<int>(idx / k_count);
                     const int k = static_cast<int>(idx % k_count);
                     if (!alive[m]) {
                       scratch.costs[idx] = kInf;
                       continue;
                     }
                     std::span<Vec4> delta(
                         scratch.perturbations.data() + idx * n, n);
                     sample_rollout_perturbations(
                         cfg.mppi,
                         StreamKey{seed, static_cast<std::uint64_t>(m),
                                   iter_cycle},
                         k, delta);
                     Rollout& r = scratch.trajectories[idx];
                     rollout_into(r, x, nominals[m], delta, cfg.dynamics);
                     r.guide = &result.guides[m];
                     scratch.costs[idx] =
                         r.valid ? stage1_cost(r, goal, snap.clearance_index,
                                               cfg.weights, last_applied)
                                 : kInf;
                   }
                 });

    for (int m = 0; m < m_count; ++m) {
      if (!alive[m]) continue;
      const std::size_t base = static_cast<std::size_t>(m) * k_count;
      std::vector<double> slice(scratch.costs.begin() + base,
                                scratch.costs.begin() + base + k_count);
      try {
        auto weights = compute_weights(slice, cfg.mppi.lambda);
        update_nominal(nominals[m],
                       std::span<const Vec4>(
                           scratch.perturbations.data() + base * n,
                           static_cast<std::size_t>(k_count) * n),
                       weights, cfg.dynamics);
        InstanceRecord& rec = result.per_instance[m];
        rec.stage1 = *std::min_element(slice.begin(), slice.end());
        double w2 = 0.0;
        for (double w : weights) w2 += w * w;
        rec.ess = w2 > 0.0 ? 1.0 / w2 : 0.0;
      } catch (const std::runtime_error&) {
        alive[m] = 0;  // no valid rollout this cycle
      }
    }
  }

  // stage II: noise-free re-rollout of each updated nominal, simplified cost
  parallel_for(m_count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t m = begin; m < end; ++m) {
      InstanceRecord& rec = result.per_instance[m];
      rec.valid = false;
      rec.stage2 = kInf;
      if (!alive[m]) continue;
      std::span<Vec4> zeros(scratch.zero_deltas.data() + m * n, n);
      for (auto& z : zeros) z.setZero();
      Rollout& r = scratch.re_rollouts[m];
      rollout_into(r, x, nominals[m], zeros, cfg.dynamics);
      r.guide = &result.guides[m];
      if (!r.valid) continue;
      rec.stage2 = stage2_cost(r, goal, snap.clearance_index, cfg.weights);
      rec.valid = std::isfinite(rec.stage2);
      rec.nominal = nominals[m];
    }
  });

  int winner = -1;
  for (int m = 0; m < m_count; ++m) {
    const InstanceRecord& rec = result.per_instance[m];
    if (!rec.valid) continue;
    if (winner < 0 || rec.stage2 < result.per_instance[winner].stage2)
      winner = m;
  }
  if (winner < 0) throw std::runtime_error("planning failed");

  result.winner = winner;
  result.winner_rollout = scratch.re_rollouts[winner];
  result.control =
      clamp_control(result.per_instance[winner].nominal.controls.front(),
                    cfg.dynamics);
  result.breakdown = cost_breakdown(result.winner_rollout, goal,
                                    snap.clearance_index, cfg.weights,
                                    last_applied);
  return result;
}

PlanResult plan_step(const State& x, const GoalSpec& goal,
                     const PerceptionSnapshot& snap, const EnsembleConfig& cfg,
                     const NominalSequence& previous,
                     const ControlInput& last_applied, std::uint64_t cycle,
                     std::uint64_t seed) {
  PlanScratch scratch;
  return plan_step(x, goal, snap, cfg, previous, last_applied, cycle, seed,
                   scratch);
}

std::string to_string(EpisodeStatus status) {
  switch (status) {
    case EpisodeStatus::running: return "running";
    case EpisodeStatus::success: return "success";
    case EpisodeStatus::collision: return "collision";
    case EpisodeStatus::timeout: return "timeout";
    case EpisodeStatus::planner_failure: return "planner-failure";
  }
  return "running";
}

const char* TrajectoryLog::schema() {
  return "# amppi-trajectory v1\n"
         "t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,thrust,wx,wy,wz,winner,stage2,"
         "clearance,j_track,j_vnorm,j_ctrl,j_goal,j_col";
}

void TrajectoryLog::write_csv(std::ostream& out) const {
  out << schema() << "\n";
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof(buf), "%.17g%c", v, sep);
    out << buf;
  };
  for (const auto& r : records) {
    put(r.t, ',');
    put(r.p.x(), ',');
    put(r.p.y(), ',');
    put(r.p.z(), ',');
    put(r.v.x(), ',');
    put(r.v.y(), ',');
    put(r.v.z(), ',');
    put(r.q.w(), ',');
    put(r.q.x(), ',');
    put(r.q.y(), ',');
    put(r.q.z(), ',');
    put(r.u.thrust, ',');
    put(r.u.omega.x(), ',');
    put(r.u.omega.y(), ',');
    put(r.u.omega.z(), ',');
    out << r.winner << ',';
    put(r.stage2, ',');
    put(r.clearance, ',');
    put(r.breakdown.track, ',');
    put(r.breakdown.vnorm, ',');
    put(r.breakdown.ctrl, ',');
    put(r.breakdown.goal, ',');
    put(r.breakdown.collision, '\n');
  }
}

std::string TrajectoryLog::to_csv() const {
  std::ostringstream out;
  write_csv(out);
  return out.str();
}

EpisodeState make_episode_state(const World& world, const EnsembleConfig& cfg) {
  EpisodeState es;
  es.x.p = world.scene.start;
  es.last_applied = cfg.dynamics.hover();
  return es;
}

void execute_cycle(EpisodeState& es, const World& world, const GoalSpec& goal,
                   const EnsembleConfig& cfg, const EpisodeParams& params,
                   std::uint64_t seed, PlanScratch& scratch) {
  if (es.status != EpisodeStatus::running) return;

  // sense
  es.buffer.push(lidar_scan(world.scene, es.x, world.lidar,
                            mix64(seed) + es.cycle));
  const PerceptionSnapshot snap = build_snapshot(es.buffer, es.x, cfg.r_max);

  // plan: fall back to hover feedforward when every instance fails
  ControlInput u = cfg.dynamics.hover();
  int winner = -1;
  double stage2 = kInf;
  CostBreakdown breakdown;
  try {
    PlanResult plan = plan_step(es.x, goal, snap, cfg, es.nominal,
                                es.last_applied, es.cycle, seed, scratch);
    u = plan.control;
    winner = plan.winner;
    stage2 = plan.per_instance[plan.winner].stage2;
    breakdown = plan.breakdown;
    es.nominal = std::move(plan.per_instance[plan.winner].nominal);
    es.consecutive_failures = 0;
  } catch (const std::runtime_error&) {
    ++es.consecutive_failures;
  }

  // act for one replan period
  DynamicsParams step_prm = cfg.dynamics;
  step_prm.dt = 1.0 / cfg.replan_hz;
  es.x = rk4_step(es.x, u, step_prm);
  es.t += step_prm.dt;
  es.last_applied = u;
  ++es.cycle;

  // log
  LogRecord rec;
  rec.t = es.t;
  rec.p = es.x.p;
  rec.v = es.x.v;
  rec.q = es.x.q;
  rec.u = u;
  rec.winner = winner;
  rec.stage2 = stage2;
  rec.clearance = true_clearance(world.scene, es.x.p);
  rec.breakdown = breakdown;
  es.log.records.push_back(rec);

  // classify
  if (check_collision(world.scene, es.x.p, params.drone_radius)) {
    es.status = EpisodeStatus::collision;
  } else if (params.goal_radius > 0.0 &&
             (es.x.p - goal.p_goal).norm() <= params.goal_radius) {
    es.status = EpisodeStatus::success;
  } else if (es.consecutive_failures >= params.max_planner_failures) {
    es.status = EpisodeStatus::planner_failure;
  } else if (es.t >= params.timeout) {
    es.status = EpisodeStatus::timeout;
  }
}

}  // namespace amppi
