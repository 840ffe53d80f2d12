// Command-line front end: single episodes, seed batches, density sweeps, and
// scenario generation. Outputs are CSV/JSON files under --out.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "amppi/config.hpp"
#include "amppi/io.hpp"
#include "amppi/metrics.hpp"
#include "amppi/parallel.hpp"

namespace fs = std::filesystem;
using namespace amppi;

namespace {

// seeds accept "1,2,3" lists and "1..20" ranges
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dots = item.find("..");
    if (dots != std::string::npos) {
      const std::uint64_t lo = std::stoull(item.substr(0, dots));
      const std::uint64_t hi = std::stoull(item.substr(dots + 2));
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else if (!item.empty()) {
      seeds.push_back(std::stoull(item));
    }
  }
  return seeds;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

EnsembleConfig load_or_default(const std::string& path) {
  if (path.empty()) return default_config();
  return load_config(path);
}

Scenario resolve_scene(const std::string& kind, const std::string& scene_file,
                       std::uint64_t seed) {
  if (!scene_file.empty()) return load_scenario(scene_file);
  return generate_scenario(scenario_kind_from_string(kind), seed);
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anchor-guided ensemble MPPI planner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  unsigned threads = 0;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");

  // --- run ---------------------------------------------------------------
  auto* run_cmd = app.add_subcommand("run", "run one episode");
  std::string run_kind = "forest";
  std::string run_scene;
  std::uint64_t run_seed = 1;
  double run_cap = 0.0;
  bool run_debug = false;
  run_cmd->add_option("--kind", run_kind, "empty|forest|verticals|inclines|two_gap");
  run_cmd->add_option("--scene", run_scene, "scenario JSON file (overrides --kind)");
  run_cmd->add_option("--seed", run_seed, "episode seed");
  run_cmd->add_option("--cap", run_cap, "velocity cap label, m/s (0 = defaults)");
  run_cmd->add_flag("--debug", run_debug, "dump first-cycle partition and anchors");

  // --- batch ---------------------------------------------------------------
  auto* batch_cmd = app.add_subcommand("batch", "episodes over seeds x caps");
  std::string batch_kind = "forest";
  std::string batch_seeds = "1..20";
  std::string batch_caps = "3.0";
  batch_cmd->add_option("--kind", batch_kind, "scenario kind");
  batch_cmd->add_option("--seeds", batch_seeds, "e.g. 1..20 or 1,5,9");
  batch_cmd->add_option("--caps", batch_caps, "velocity cap list, m/s");

  // --- sweep ---------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand("sweep", "obstacle-density sweep");
  std::string sweep_counts = "200,400,600,800,1000";
  std::string sweep_heights = "random";
  std::string sweep_seeds = "1..10";
  sweep_cmd->add_option("--counts", sweep_counts, "obstacle counts");
  sweep_cmd->add_option("--height-mode", sweep_heights, "random|fixed");
  sweep_cmd->add_option("--seeds", sweep_seeds, "seed list");

  // --- scenario gen ----------------------------------------------------------
  auto* scenario_cmd = app.add_subcommand("scenario", "scenario utilities");
  auto* gen_cmd = scenario_cmd->add_subcommand("gen", "generate a scenario file");
  std::string gen_kind = "forest";
  std::uint64_t gen_seed = 1;
  std::string gen_out = "scene.json";
  gen_cmd->add_option("--kind", gen_kind, "scenario kind");
  gen_cmd->add_option("--seed", gen_seed, "generation seed");
  gen_cmd->add_option("--file", gen_out, "output file");

  CLI11_PARSE(app, argc, argv);
  set_worker_count(threads);

  try {
    EnsembleConfig cfg = load_or_default(config_path);
    EpisodeParams params;
    LidarModel lidar;
    lidar.r_max = cfg.r_max;

    if (*gen_cmd) {
      Scenario scene =
          generate_scenario(scenario_kind_from_string(gen_kind), gen_seed);
      save_scenario(scene, gen_out);
      std::cout << "wrote " << gen_out << " (" << scene.obstacles.size()
                << " obstacles)\n";
      return 0;
    }

    if (*run_cmd) {
      ensure_dir(out_dir);
      Scenario scene = resolve_scene(run_kind, run_scene, run_seed);
      EnsembleConfig run_cfg = apply_velocity_cap(cfg, run_cap);

      if (run_debug) {
        World world{scene, lidar};
        EpisodeState es = make_episode_state(world, run_cfg);
        es.buffer.push(lidar_scan(scene, es.x, lidar, mix64(run_seed)));
        auto snap = build_snapshot(es.buffer, es.x, run_cfg.r_max);
        std::ofstream part_out(out_dir + "/partition.csv");
        write_partition_csv(part_out, snap.partition);
        GoalSpec goal = GoalSpec::facing(scene.start, scene.goal);
        auto plan = plan_step(es.x, goal, snap, run_cfg, es.nominal,
                              es.last_applied, 0, run_seed);
        std::ofstream anchor_out(out_dir + "/anchors.csv");
        write_anchors_csv(anchor_out, 0, plan.anchors, plan.guides);
      }

      EpisodeResult ep = run_episode(scene, run_cfg, params, lidar, run_seed);
      std::ofstream traj(out_dir + "/trajectory.csv");
      ep.log.write_csv(traj);

      std::cout << "status: " << to_string(ep.status) << "  t=" << ep.duration
                << " s\n";
      std::cout << "avg_vel=" << ep.metrics.avg_vel
                << " max_vel=" << ep.metrics.max_vel
                << " smoothness=" << ep.metrics.smoothness
                << " length=" << ep.metrics.path_length
                << " clearance=" << ep.metrics.avg_clearance << "/"
                << ep.metrics.min_clearance << "\n";
      std::cout << "trajectory: " << out_dir << "/trajectory.csv\n";
      return ep.status == EpisodeStatus::success ? 0 : 2;
    }

    if (*batch_cmd) {
      ensure_dir(out_dir);
      auto report = run_batch(scenario_kind_from_string(batch_kind),
                              parse_seeds(batch_seeds), parse_doubles(batch_caps),
                              cfg, params, lidar);
      std::ofstream rows(out_dir + "/batch_rows.csv");
      write_batch_rows_csv(rows, report.rows);
      write_text_file(out_dir + "/batch_summary.json",
                      batch_report_to_json(report));
      write_batch_summary_text(std::cout, report);
      std::cout << "rows: " << out_dir << "/batch_rows.csv\n";
      std::cout << "summary: " << out_dir << "/batch_summary.json\n";
      return 0;
    }

    if (*sweep_cmd) {
      ensure_dir(out_dir);
      const HeightMode mode = sweep_heights == "fixed" ? HeightMode::fixed_6
                                                       : HeightMode::random_1_to_6;
      std::vector<int> counts;
      for (double c : parse_doubles(sweep_counts))
        counts.push_back(static_cast<int>(c));
      auto report =
          density_sweep(counts, mode, parse_seeds(sweep_seeds), cfg, params, lidar);
      write_text_file(out_dir + "/sweep_summary.json",
                      sweep_report_to_json(report));
      std::vector<EpisodeRow> all_rows;
      for (const auto& cell : report.cells)
        all_rows.insert(all_rows.end(), cell.rows.begin(), cell.rows.end());
      std::ofstream rows(out_dir + "/sweep_rows.csv");
      write_batch_rows_csv(rows, all_rows);
      write_sweep_summary_text(std::cout, report);
      std::cout << "summary: " << out_dir << "/sweep_summary.json\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
