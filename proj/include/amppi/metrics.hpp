#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amppi/ensemble.hpp"

namespace amppi {

struct EpisodeMetrics {
  double avg_vel{0.0};        // m/s
  double max_vel{0.0};        // m/s
  double smoothness{0.0};     // integral of squared jerk, m^2/s^5
  double path_length{0.0};    // m
  double avg_clearance{0.0};  // m
  double min_clearance{0.0};  // m
};

/// Table metrics from a trajectory log: velocities from the logged v, path
/// length as the sum of position increments, smoothness from second-order
/// central differences of v (one-sided at the ends), clearance re-evaluated
/// against the scene per sample. Throws on logs shorter than 4 samples.
EpisodeMetrics compute_metrics(const TrajectoryLog& log, const Scenario& scene);

struct EpisodeResult {
  EpisodeStatus status{EpisodeStatus::timeout};
  double duration{0.0};  // simulated seconds
  EpisodeMetrics metrics;
  TrajectoryLog log;
};

/// Runs one closed-loop episode to termination.
EpisodeResult run_episode(const Scenario& scene, const EnsembleConfig& cfg,
                          const EpisodeParams& params, const LidarModel& lidar,
                          std::uint64_t seed);

/// Velocity caps scale the velocity-norm weight (quadratically, normalized
/// at the default guide terminal speed) and retarget the guide terminal
/// speed; the cap value itself is reported as the configuration label.
EnsembleConfig apply_velocity_cap(const EnsembleConfig& cfg, double cap);

struct EpisodeRow {
  std::string scenario;
  double cap{0.0};
  std::uint64_t seed{0};
  EpisodeStatus status{EpisodeStatus::timeout};
  double duration{0.0};
  EpisodeMetrics metrics;
};

struct MetricStats {
  double mean{0.0};
  double stddev{0.0};
};

struct Aggregate {
  int episodes{0};
  int successes{0};
  double success_rate{0.0};
  // over successful episodes only
  MetricStats avg_vel, max_vel, smoothness, path_length, avg_clearance,
      min_clearance;
};

/// Success rate plus mean ± sample-stddev of each metric over successes.
Aggregate aggregate_rows(const std::vector<EpisodeRow>& rows);

struct BatchGroup {
  double cap{0.0};
  Aggregate aggregate;
};

struct BatchReport {
  std::string scenario;
  std::vector<EpisodeRow> rows;      // one per (cap, seed)
  std::vector<BatchGroup> groups;    // one per cap
};

/// One episode per (cap, seed); episodes run concurrently, per-episode
/// determinism comes from the per-episode seed.
BatchReport run_batch(ScenarioKind kind, const std::vector<std::uint64_t>& seeds,
                      const std::vector<double>& caps, const EnsembleConfig& cfg,
                      const EpisodeParams& params, const LidarModel& lidar);

enum class HeightMode { random_1_to_6, fixed_6 };

struct SweepCell {
  int count{0};
  Aggregate aggregate;
  std::vector<EpisodeRow> rows;
};

struct SweepReport {
  HeightMode mode{HeightMode::random_1_to_6};
  std::vector<SweepCell> cells;
};

/// Verticals-style scenes at each obstacle count (0 = open field).
SweepReport density_sweep(const std::vector<int>& counts, HeightMode mode,
                          const std::vector<std::uint64_t>& seeds,
                          const EnsembleConfig& cfg, const EpisodeParams& params,
                          const LidarModel& lidar);

Scenario generate_sweep_scenario(int count, HeightMode mode, std::uint64_t seed);

}  // namespace amppi
