#include "amppi/io.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace amppi {

namespace {

void put(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

}  // namespace

void write_cloud_frame(std::ostream& out, const CloudFrame& frame) {
  out << "# amppi-cloud v1\n";
  out << "frame " << frame.frame_id << "\n";
  for (const auto& p : frame.points) {
    put(out, p.x());
    out << ' ';
    put(out, p.y());
    out << ' ';
    put(out, p.z());
    out << '\n';
  }
}

CloudFrame read_cloud_frame(std::istream& in) {
  CloudFrame frame;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# amppi-cloud", 0) != 0)
    throw std::runtime_error("not a cloud frame: missing header");
  if (!std::getline(in, line) || line.rfind("frame ", 0) != 0)
    throw std::runtime_error("not a cloud frame: missing frame id");
  frame.frame_id = std::stoull(line.substr(6));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Vec3 p;
    if (!(ls >> p.x() >> p.y() >> p.z()))
      throw std::runtime_error("malformed cloud point line: " + line);
    frame.points.push_back(p);
  }
  return frame;
}

void save_cloud_frame(const CloudFrame& frame, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write cloud frame: " + path);
  write_cloud_frame(out, frame);
}

CloudFrame load_cloud_frame(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read cloud frame: " + path);
  return read_cloud_frame(in);
}

void write_partition_csv(std::ostream& out, const SphericalPartition& part) {
  out << "i,j,range\n";
  for (int i = 0; i < kAzimuthCells; ++i)
    for (int j = 0; j < kElevationCells; ++j) {
      out << i << ',' << j << ',';
      put(out, part.ranges(i, j));
      out << '\n';
    }
}

void write_anchors_csv(std::ostream& out, int step,
                       const std::vector<Anchor>& anchors,
                       const std::vector<GuidingTrajectory>& guides,
                       int samples) {
  out << "step,anchor,x,y,z\n";
  auto row = [&](int a, const Vec3& p) {
    out << step << ',' << a << ',';
    put(out, p.x());
    out << ',';
    put(out, p.y());
    out << ',';
    put(out, p.z());
    out << '\n';
  };
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    row(static_cast<int>(a), anchors[a].refined_endpoint);
    if (a < guides.size())
      for (int s = 1; s <= samples; ++s)
        row(static_cast<int>(a),
            eval_guide(guides[a], guides[a].horizon * s / samples));
  }
}

void write_batch_rows_csv(std::ostream& out,
                          const std::vector<EpisodeRow>& rows) {
  out << "scenario,cap,seed,metric,value\n";
  auto emit = [&](const EpisodeRow& r, const char* metric, double value) {
    out << r.scenario << ',';
    put(out, r.cap);
    out << ',' << r.seed << ',' << metric << ',';
    put(out, value);
    out << '\n';
  };
  for (const auto& r : rows) {
    emit(r, "success", r.status == EpisodeStatus::success ? 1.0 : 0.0);
    emit(r, "duration", r.duration);
    emit(r, "avg_vel", r.metrics.avg_vel);
    emit(r, "max_vel", r.metrics.max_vel);
    emit(r, "smoothness", r.metrics.smoothness);
    emit(r, "path_length", r.metrics.path_length);
    emit(r, "avg_clearance", r.metrics.avg_clearance);
    emit(r, "min_clearance", r.metrics.min_clearance);
  }
}

namespace {

nlohmann::json stats_json(const MetricStats& s) {
  return {{"mean", s.mean}, {"stddev", s.stddev}};
}

nlohmann::json aggregate_json(const Aggregate& a) {
  nlohmann::json j;
  j["episodes"] = a.episodes;
  j["successes"] = a.successes;
  j["success_rate"] = a.success_rate;
  j["avg_vel"] = stats_json(a.avg_vel);
  j["max_vel"] = stats_json(a.max_vel);
  j["smoothness"] = stats_json(a.smoothness);
  j["path_length"] = stats_json(a.path_length);
  j["avg_clearance"] = stats_json(a.avg_clearance);
  j["min_clearance"] = stats_json(a.min_clearance);
  return j;
}

nlohmann::json row_json(const EpisodeRow& r) {
  nlohmann::json j;
  j["scenario"] = r.scenario;
  j["cap"] = r.cap;
  j["seed"] = r.seed;
  j["status"] = to_string(r.status);
  j["duration"] = r.duration;
  j["avg_vel"] = r.metrics.avg_vel;
  j["max_vel"] = r.metrics.max_vel;
  j["smoothness"] = r.metrics.smoothness;
  j["path_length"] = r.metrics.path_length;
  j["avg_clearance"] = r.metrics.avg_clearance;
  j["min_clearance"] = r.metrics.min_clearance;
  return j;
}

}  // namespace

std::string batch_report_to_json(const BatchReport& report) {
  nlohmann::json j;
  j["scenario"] = report.scenario;
  j["groups"] = nlohmann::json::array();
  for (const auto& g : report.groups) {
    nlohmann::json gj = aggregate_json(g.aggregate);
    gj["cap"] = g.cap;
    j["groups"].push_back(gj);
  }
  j["episodes"] = nlohmann::json::array();
  for (const auto& r : report.rows) j["episodes"].push_back(row_json(r));
  return j.dump(2);
}

std::string sweep_report_to_json(const SweepReport& report) {
  nlohmann::json j;
  j["height_mode"] =
      report.mode == HeightMode::fixed_6 ? "fixed_6" : "random_1_to_6";
  j["cells"] = nlohmann::json::array();
  for (const auto& cell : report.cells) {
    nlohmann::json cj = aggregate_json(cell.aggregate);
    cj["count"] = cell.count;
    cj["episodes"] = nlohmann::json::array();
    for (const auto& r : cell.rows) cj["episodes"].push_back(row_json(r));
    j["cells"].push_back(cj);
  }
  return j.dump(2);
}

namespace {

void write_aggregate_line(std::ostream& out, const Aggregate& a) {
  out << a.successes << '/' << a.episodes << " ok (" << std::fixed
      << std::setprecision(2) << 100.0 * a.success_rate << "%)"
      << "  vel " << a.avg_vel.mean << "±" << a.avg_vel.stddev << " max "
      << a.max_vel.mean << "  smooth " << a.smoothness.mean << "  len "
      << a.path_length.mean << "  clr " << a.avg_clearance.mean << "/min "
      << a.min_clearance.mean << std::defaultfloat << '\n';
}

}  // namespace

void write_batch_summary_text(std::ostream& out, const BatchReport& report) {
  out << "scenario: " << report.scenario << '\n';
  for (const auto& g : report.groups) {
    out << "  cap " << g.cap << " m/s: ";
    write_aggregate_line(out, g.aggregate);
  }
}

void write_sweep_summary_text(std::ostream& out, const SweepReport& report) {
  out << "height mode: "
      << (report.mode == HeightMode::fixed_6 ? "fixed 6 m" : "random 1-6 m")
      << '\n';
  for (const auto& cell : report.cells) {
    out << "  count " << cell.count << ": ";
    write_aggregate_line(out, cell.aggregate);
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

}  // namespace amppi
