#include "amppi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "amppi/parallel.hpp"

namespace amppi {

EpisodeMetrics compute_metrics(const TrajectoryLog& log, const Scenario& scene) {
  const auto& rec = log.records;
  const std::size_t n = rec.size();
  if (n < 4) throw std::invalid_argument("log too short for jerk estimation");
  const double dt = rec[1].t - rec[0].t;

  EpisodeMetrics m;
  m.min_clearance = std::numeric_limits<double>::infinity();
  double speed_sum = 0.0;
  double clearance_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double speed = rec[i].v.norm();
    speed_sum += speed;
    m.max_vel = std::max(m.max_vel, speed);
    if (i + 1 < n) m.path_length += (rec[i + 1].p - rec[i].p).norm();
    const double c = true_clearance(scene, rec[i].p);
    clearance_sum += c;
    m.min_clearance = std::min(m.min_clearance, c);
  }
  m.avg_vel = speed_sum / n;
  m.avg_clearance = clearance_sum / n;

  // jerk = d²v/dt² by second differences; one-sided at the ends
  auto second_diff = [&](std::size_t a, std::size_t b, std::size_t c) {
    return (rec[c].v - 2.0 * rec[b].v + rec[a].v) / (dt * dt);
  };
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 jerk;
    if (i == 0)
      jerk = second_diff(0, 1, 2);
    else if (i == n - 1)
      jerk = second_diff(n - 3, n - 2, n - 1);
    else
      jerk = second_diff(i - 1, i, i + 1);
    m.smoothness += jerk.squaredNorm() * dt;
  }
  return m;
}

EpisodeResult run_episode(const Scenario& scene, const EnsembleConfig& cfg,
                          const EpisodeParams& params, const LidarModel& lidar,
                          std::uint64_t seed) {
  World world{scene, lidar};
  EpisodeState es = make_episode_state(world, cfg);
  GoalSpec goal = GoalSpec::facing(scene.start, scene.goal);
  PlanScratch scratch;

  const std::uint64_t max_cycles =
      static_cast<std::uint64_t>(params.timeout * cfg.replan_hz) + 2;
  while (es.status == EpisodeStatus::running && es.cycle < max_cycles)
    execute_cycle(es, world, goal, cfg, params, seed, scratch);

  EpisodeResult result;
  result.status = es.status == EpisodeStatus::running ? EpisodeStatus::timeout
                                                      : es.status;
  result.duration = es.t;
  result.log = std::move(es.log);
  if (result.log.records.size() >= 4)
    result.metrics = compute_metrics(result.log, scene);
  return result;
}

EnsembleConfig apply_velocity_cap(const EnsembleConfig& cfg, double cap) {
  if (!(cap > 0.0)) return cfg;
  EnsembleConfig out = cfg;
  const double reference = cfg.grid.terminal_speed;
  out.weights.q_vnorm = cfg.weights.q_vnorm * (reference / cap) * (reference / cap);
  out.grid.terminal_speed = cap;
  return out;
}

namespace {

MetricStats stats_of(const std::vector<double>& xs) {
  MetricStats s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / xs.size();
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / (xs.size() - 1));
  }
  return s;
}

}  // namespace

Aggregate aggregate_rows(const std::vector<EpisodeRow>& rows) {
  Aggregate agg;
  agg.episodes = static_cast<int>(rows.size());
  std::vector<double> avg_vel, max_vel, smooth, length, avg_clr, min_clr;
  for (const auto& row : rows) {
    if (row.status != EpisodeStatus::success) continue;
    ++agg.successes;
    avg_vel.push_back(row.metrics.avg_vel);
    max_vel.push_back(row.metrics.max_vel);
    smooth.push_back(row.metrics.smoothness);
    length.push_back(row.metrics.path_length);
    avg_clr.push_back(row.metrics.avg_clearance);
    min_clr.push_back(row.metrics.min_clearance);
  }
  agg.success_rate =
      agg.episodes > 0 ? static_cast<double>(agg.successes) / agg.episodes : 0.0;
  agg.avg_vel = stats_of(avg_vel);
  agg.max_vel = stats_of(max_vel);
  agg.smoothness = stats_of(smooth);
  agg.path_length = stats_of(length);
  agg.avg_clearance = stats_of(avg_clr);
  agg.min_clearance = stats_of(min_clr);
  return agg;
}

BatchReport run_batch(ScenarioKind kind, const std::vector<std::uint64_t>& seeds,
                      const std::vector<double>& caps, const EnsembleConfig& cfg,
                      const EpisodeParams& params, const LidarModel& lidar) {
  BatchReport report;
  report.scenario = to_string(kind);

  struct Job {
    double cap;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double cap : caps)
    for (std::uint64_t seed : seeds) jobs.push_back({cap, seed});
  report.rows.resize(jobs.size());

  parallel_for(jobs.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Job& job = jobs[i];
      const Scenario scene = generate_scenario(kind, job.seed);
      const EnsembleConfig run_cfg = apply_velocity_cap(cfg, job.cap);
      EpisodeResult ep = run_episode(scene, run_cfg, params, lidar, job.seed);
      EpisodeRow& row = report.rows[i];
      row.scenario = report.scenario;
      row.cap = job.cap;
      row.seed = job.seed;
      row.status = ep.status;
      row.duration = ep.duration;
      row.metrics = ep.metrics;
    }
  });

  for (double cap : caps) {
    std::vector<EpisodeRow> group;
    for (const auto& row : report.rows)
      if (row.cap == cap) group.push_back(row);
    report.groups.push_back({cap, aggregate_rows(group)});
  }
  return report;
}

Scenario generate_sweep_scenario(int count, HeightMode mode, std::uint64_t seed) {
  CylinderFieldParams params;
  params.count = count;
  params.radius_min = 0.4;
  params.radius_max = 1.1;
  if (mode == HeightMode::fixed_6) {
    params.height_min = 6.0;
    params.height_max = 6.0;
  } else {
    params.height_min = 1.0;
    params.height_max = 6.0;
  }
  params.tilt_max = 0.0;
  return generate_cylinder_field(params, seed, "verticals");
}

SweepReport density_sweep(const std::vector<int>& counts, HeightMode mode,
                          const std::vector<std::uint64_t>& seeds,
                          const EnsembleConfig& cfg, const EpisodeParams& params,
                          const LidarModel& lidar) {
  SweepReport report;
  report.mode = mode;
  report.cells.resize(counts.size());

  struct Job {
    std::size_t cell;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < counts.size(); ++c)
    for (std::uint64_t seed : seeds) jobs.push_back({c, seed});
  std::vector<EpisodeRow> rows(jobs.size());

  parallel_for(jobs.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Job& job = jobs[i];
      const Scenario scene =
          generate_sweep_scenario(counts[job.cell], mode, job.seed);
      EpisodeResult ep = run_episode(scene, cfg, params, lidar, job.seed);
      EpisodeRow& row = rows[i];
      row.scenario = "sweep";
      row.cap = cfg.grid.terminal_speed;
      row.seed = job.seed;
      row.status = ep.status;
      row.duration = ep.duration;
      row.metrics = ep.metrics;
    }
  });

  for (std::size_t i = 0; i < jobs.size(); ++i)
    report.cells[jobs[i].cell].rows.push_back(rows[i]);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    report.cells[c].count = counts[c];
    report.cells[c].aggregate = aggregate_rows(report.cells[c].rows);
  }
  return report;
}

}  // namespace amppi
