#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "amppi/types.hpp"

namespace amppi {

// High-resolution grid: 3° cells over the full sphere.
inline constexpr int kAzimuthCells = 120;
inline constexpr int kElevationCells = 60;
// Coarse grid: 6x6 pooling to 18° cells.
inline constexpr int kPoolFactor = 6;
inline constexpr int kCoarseAzimuthCells = kAzimuthCells / kPoolFactor;
inline constexpr int kCoarseElevationCells = kElevationCells / kPoolFactor;
// Points closer than this are treated as self-returns and dropped.
inline constexpr double kMinPointRange = 0.05;
// Free-space clearance reported when no point is in range: the sensing
// radius plus the distance a rollout can cover over the horizon.
inline constexpr double kHorizonReach = 25.0;

// Unit direction for spherical angles (azimuth about +z from +x, elevation
// from the horizontal plane).
inline Vec3 direction_from_angles(double azimuth, double elevation) {
  const double ce = std::cos(elevation);
  return Vec3(ce * std::cos(azimuth), ce * std::sin(azimuth),
              std::sin(elevation));
}

int azimuth_cell(double azimuth);      // [-pi, pi] -> [0, kAzimuthCells)
int elevation_cell(double elevation);  // [-pi/2, pi/2] -> [0, kElevationCells)

/// Center direction of high-resolution cell (i, j); throws on bad indices.
Vec3 cell_direction(int i, int j);

// Ring buffer of world-frame point-cloud frames; oldest evicted first.
class PointCloudBuffer {
 public:
  explicit PointCloudBuffer(std::size_t capacity = 10) : capacity_(capacity) {}

  void push(std::vector<Vec3> world_frame_points);

  std::size_t frames() const { return frames_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t total_points() const;

  // Accumulated set projected into the body frame of `pose`.
  std::vector<Vec3> body_points(const State& pose) const;

 private:
  std::deque<std::vector<Vec3>> frames_;
  std::size_t capacity_;
};

// Per-cone nearest ranges over the accumulated cloud. Empty cells hold
// exactly r_max and carry no point.
struct SphericalPartition {
  double r_max{10.0};
  Eigen::ArrayXXd ranges;               // kAzimuthCells x kElevationCells
  std::vector<Vec3> nearest;            // body frame, one slot per cell
  std::vector<std::uint8_t> has_point;  // one flag per cell

  static int flat(int i, int j) { return i * kElevationCells + j; }
};

// 6x6 pooled safe directions: per coarse cell the widest high-res cone.
struct CoarsePartition {
  double r_max{10.0};
  Eigen::ArrayXXd safe_range;  // kCoarseAzimuthCells x kCoarseElevationCells
  std::vector<Vec3> safe_dir;    // unit direction of the argmax cell
  std::vector<Vec3> safe_point;  // safe_range * safe_dir

  static int flat(int I, int J) { return I * kCoarseElevationCells + J; }
};

int coarse_azimuth_cell(double azimuth);
int coarse_elevation_cell(double elevation);

// One nearest point per occupied high-res cell.
struct FilteredCloud {
  enum class Frame { body, world };

  Frame frame{Frame::body};
  double r_max{10.0};
  std::vector<Vec3> points;

  double far_clearance() const { return r_max + kHorizonReach; }
};

/// Bins a body-frame cloud into per-cone nearest ranges. Points outside
/// (kMinPointRange, r_max] are discarded.
SphericalPartition build_partition(const std::vector<Vec3>& body_cloud,
                                   double r_max = 10.0);

/// Argmax-range pooling; ties break toward the lowest (i, j) lexicographic
/// index.
CoarsePartition pool_coarse(const SphericalPartition& part);

FilteredCloud filtered_cloud(const SphericalPartition& part);
FilteredCloud to_world_frame(const FilteredCloud& fc, const State& pose);

/// Exact minimum distance from p to the filtered points (linear scan);
/// far_clearance() when the cloud is empty.
double clearance(const FilteredCloud& fc, const Vec3& p);

// Uniform-grid index over the filtered points. nearest() returns the exact
// minimum distance (bit-equal to the linear scan) using ring-bounded search:
// after finishing the cells within Chebyshev ring r of the query cell, any
// unvisited point is at least r * cell_size away.
class ClearanceIndex {
 public:
  ClearanceIndex() = default;
  explicit ClearanceIndex(const FilteredCloud& fc, double cell_size = 1.0);

  double nearest(const Vec3& p) const;
  bool empty() const { return points_.empty(); }
  double far_clearance() const { return far_; }

 private:
  int cell_of(const Vec3& p, int axis) const;

  double cell_{1.0};
  double far_{35.0};
  Vec3 origin_{Vec3::Zero()};
  Eigen::Vector3i dims_{Eigen::Vector3i::Zero()};
  std::vector<std::int32_t> cell_start_;  // CSR offsets, dims+1 entries
  std::vector<Vec3> points_;              // reordered by cell
};

// Immutable per-cycle perception product, shared read-only by all rollout
// workers during a planning step.
struct PerceptionSnapshot {
  State pose;  // pose the cloud was projected at
  SphericalPartition partition;
  CoarsePartition coarse;
  FilteredCloud filtered;  // world frame
  ClearanceIndex clearance_index;
};

PerceptionSnapshot build_snapshot(const PointCloudBuffer& buffer,
                                  const State& pose, double r_max = 10.0);

}  // namespace amppi
