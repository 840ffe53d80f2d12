#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "amppi/costs.hpp"
#include "amppi/guidance.hpp"
#include "amppi/mppi.hpp"
#include "amppi/perception.hpp"
#include "amppi/sim_world.hpp"

namespace amppi {

struct EnsembleConfig {
  AnchorGrid grid;  // m_h x m_v anchors, one MPPI instance per anchor
  MppiConfig mppi;
  CostWeights weights;
  DynamicsParams dynamics;
  double replan_hz{50.0};
  double r_max{10.0};  // sensing radius used by perception snapshots
};

struct InstanceRecord {
  double stage1{0.0};  // best sampled stage-1 cost in the final update
  double stage2{0.0};  // stage-2 cost of the re-rolled nominal
  double ess{0.0};
  bool valid{false};
  NominalSequence nominal;
};

struct PlanResult {
  int winner{-1};
  ControlInput control;
  Rollout winner_rollout;  // noise-free re-rollout of the winner nominal
  std::vector<InstanceRecord> per_instance;
  std::vector<Anchor> anchors;
  std::vector<GuidingTrajectory> guides;
  CostBreakdown breakdown;  // winner terms for logging
};

// Reusable workspace; plan_step output is identical with or without reuse.
struct PlanScratch {
  std::vector<Vec4> perturbations;    // M*K*N
  std::vector<Rollout> trajectories;  // M*K
  std::vector<double> costs;          // M*K
  std::vector<double> slice_weights;  // K
  std::vector<Vec4> zero_deltas;      // N per instance
  std::vector<Rollout> re_rollouts;   // M

  void resize(int instances, const MppiConfig& cfg);
};

/// One planning cycle: anchors -> guides -> per-instance stage-I MPPI
/// updates from the shifted previous winner nominal -> noise-free stage-II
/// re-rollouts -> minimum stage-II winner (ties to the lowest index).
/// Throws "planning failed" when every instance is invalid.
PlanResult plan_step(const State& x, const GoalSpec& goal,
                     const PerceptionSnapshot& snap, const EnsembleConfig& cfg,
                     const NominalSequence& previous,
                     const ControlInput& last_applied, std::uint64_t cycle,
                     std::uint64_t seed, PlanScratch& scratch);

PlanResult plan_step(const State& x, const GoalSpec& goal,
                     const PerceptionSnapshot& snap, const EnsembleConfig& cfg,
                     const NominalSequence& previous,
                     const ControlInput& last_applied, std::uint64_t cycle,
                     std::uint64_t seed);

// ---------------------------------------------------------------------------
// closed-loop driver
// ---------------------------------------------------------------------------

struct World {
  Scenario scene;
  LidarModel lidar;
};

enum class EpisodeStatus { running, success, collision, timeout, planner_failure };

std::string to_string(EpisodeStatus status);

struct LogRecord {
  double t{0.0};
  Vec3 p{Vec3::Zero()};
  Vec3 v{Vec3::Zero()};
  Quat q{Quat::Identity()};
  ControlInput u;
  int winner{-1};
  double stage2{0.0};
  double clearance{0.0};  // ground-truth distance to the nearest obstacle
  CostBreakdown breakdown;
};

struct TrajectoryLog {
  std::vector<LogRecord> records;

  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
  static const char* schema();  // versioned header line
};

struct EpisodeParams {
  double goal_radius{1.0};   // m; <= 0 disables success termination
  double timeout{60.0};      // simulated seconds
  double drone_radius{0.2};  // m
  int max_planner_failures{50};  // consecutive failed cycles before giving up
};

struct EpisodeState {
  State x;
  PointCloudBuffer buffer{10};
  NominalSequence nominal;  // previous winner's sequence
  ControlInput last_applied;
  std::uint64_t cycle{0};
  double t{0.0};
  int consecutive_failures{0};
  EpisodeStatus status{EpisodeStatus::running};
  TrajectoryLog log;
};

EpisodeState make_episode_state(const World& world, const EnsembleConfig& cfg);

/// Sense -> plan -> apply the winner control for 1/replan_hz seconds ->
/// log -> classify (collision beats success beats timeout).
void execute_cycle(EpisodeState& es, const World& world, const GoalSpec& goal,
                   const EnsembleConfig& cfg, const EpisodeParams& params,
                   std::uint64_t seed, PlanScratch& scratch);

}  // namespace amppi
