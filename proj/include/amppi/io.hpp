#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "amppi/guidance.hpp"
#include "amppi/metrics.hpp"
#include "amppi/perception.hpp"

namespace amppi {

// Point-cloud frame interchange: a one-line header carrying the frame id,
// then one "x y z" triple per line.
//
//   # amppi-cloud v1
//   frame <id>
//   <x> <y> <z>
//   ...
struct CloudFrame {
  std::uint64_t frame_id{0};
  std::vector<Vec3> points;
};

void write_cloud_frame(std::ostream& out, const CloudFrame& frame);
CloudFrame read_cloud_frame(std::istream& in);
void save_cloud_frame(const CloudFrame& frame, const std::string& path);
CloudFrame load_cloud_frame(const std::string& path);

/// Partition dump for golden-file comparisons: "i,j,range" per cell.
void write_partition_csv(std::ostream& out, const SphericalPartition& part);

/// Anchor/guide debug dump: "step,anchor,x,y,z" rows; each guide is sampled
/// at `samples` points after its anchor row.
void write_anchors_csv(std::ostream& out, int step,
                       const std::vector<Anchor>& anchors,
                       const std::vector<GuidingTrajectory>& guides,
                       int samples = 10);

/// Long-format batch rows: scenario,cap,seed,metric,value (one metric per
/// line, plot-ready).
void write_batch_rows_csv(std::ostream& out, const std::vector<EpisodeRow>& rows);

/// Machine-readable batch summary.
std::string batch_report_to_json(const BatchReport& report);
std::string sweep_report_to_json(const SweepReport& report);

/// Human-readable summary table.
void write_batch_summary_text(std::ostream& out, const BatchReport& report);
void write_sweep_summary_text(std::ostream& out, const SweepReport& report);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace amppi
