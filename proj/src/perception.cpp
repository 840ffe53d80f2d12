#include "amppi/perception.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace amppi {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kAzStep = 2.0 * kPi / kAzimuthCells;
constexpr double kElStep = kPi / kElevationCells;
}  // namespace

int azimuth_cell(double azimuth) {
  int i = static_cast<int>(std::floor((azimuth + kPi) / kAzStep));
  if (i >= kAzimuthCells) i -= kAzimuthCells;  // +pi wraps onto -pi
  return std::clamp(i, 0, kAzimuthCells - 1);
}

int elevation_cell(double elevation) {
  int j = static_cast<int>(std::floor((elevation + 0.5 * kPi) / kElStep));
  return std::clamp(j, 0, kElevationCells - 1);  // pole belongs to the top cell
}

int coarse_azimuth_cell(double azimuth) {
  return azimuth_cell(azimuth) / kPoolFactor;
}

int coarse_elevation_cell(double elevation) {
  return elevation_cell(elevation) / kPoolFactor;
}

Vec3 cell_direction(int i, int j) {
  if (i < 0 || i >= kAzimuthCells || j < 0 || j >= kElevationCells)
    throw std::out_of_range("cell index out of range");
  const double az = -kPi + (i + 0.5) * kAzStep;
  const double el = -0.5 * kPi + (j + 0.5) * kElStep;
  return direction_from_angles(az, el);
}

void PointCloudBuffer::push(std::vector<Vec3> world_frame_points) {
  frames_.push_back(std::move(world_frame_points));
  while (frames_.size() > capacity_) frames_.pop_front();
}

std::size_t PointCloudBuffer::total_points() const {
  std::size_t n = 0;
  for (const auto& f : frames_) n += f.size();
  return n;
}

std::vector<Vec3> PointCloudBuffer::body_points(const State& pose) const {
  std::vector<Vec3> out;
  out.reserve(total_points());
  const Eigen::Matrix3d world_to_body = pose.q.toRotationMatrix().transpose();
  for (const auto& frame : frames_)
    for (const auto& p : frame) out.push_back(world_to_body * (p - pose.p));
  return out;
}

SphericalPartition build_partition(const std::vector<Vec3>& body_cloud,
                                   double r_max) {
  SphericalPartition part;
  part.r_max = r_max;
  part.ranges = Eigen::ArrayXXd::Constant(kAzimuthCells, kElevationCells, r_max);
  part.nearest.assign(kAzimuthCells * kElevationCells, Vec3::Zero());
  part.has_point.assign(kAzimuthCells * kElevationCells, 0);

  for (const auto& p : body_cloud) {
    const double r = p.norm();
    if (!(r > kMinPointRange) || r > r_max) continue;
    const double az = std::atan2(p.y(), p.x());
    const double el = std::atan2(p.z(), std::sqrt(p.x() * p.x() + p.y() * p.y()));
    const int i = azimuth_cell(az);
    const int j = elevation_cell(el);
    const int f = SphericalPartition::flat(i, j);
    // strict < keeps the first point on exact range ties; a point at
    // exactly r_max still occupies the cell
    if (!part.has_point[f] || r < part.ranges(i, j)) {
      if (r < part.ranges(i, j)) part.ranges(i, j) = r;
      part.nearest[f] = p;
      part.has_point[f] = 1;
    }
  }
  return part;
}

CoarsePartition pool_coarse(const SphericalPartition& part) {
  CoarsePartition coarse;
  coarse.r_max = part.r_max;
  coarse.safe_range =
      Eigen::ArrayXXd::Constant(kCoarseAzimuthCells, kCoarseElevationCells, 0.0);
  coarse.safe_dir.assign(kCoarseAzimuthCells * kCoarseElevationCells,
                         Vec3::Zero());
  coarse.safe_point.assign(kCoarseAzimuthCells * kCoarseElevationCells,
                           Vec3::Zero());

  for (int I = 0; I < kCoarseAzimuthCells; ++I) {
    for (int J = 0; J < kCoarseElevationCells; ++J) {
      int best_i = I * kPoolFactor;
      int best_j = J * kPoolFactor;
      double best_r = -1.0;
      for (int i = I * kPoolFactor; i < (I + 1) * kPoolFactor; ++i) {
        for (int j = J * kPoolFactor; j < (J + 1) * kPoolFactor; ++j) {
          if (part.ranges(i, j) > best_r) {  // strict: first max wins ties
            best_r = part.ranges(i, j);
            best_i = i;
            best_j = j;
          }
        }
      }
      const int f = CoarsePartition::flat(I, J);
      coarse.safe_range(I, J) = best_r;
      coarse.safe_dir[f] = cell_direction(best_i, best_j);
      coarse.safe_point[f] = best_r * coarse.safe_dir[f];
    }
  }
  return coarse;
}

FilteredCloud filtered_cloud(const SphericalPartition& part) {
  FilteredCloud fc;
  fc.frame = FilteredCloud::Frame::body;
  fc.r_max = part.r_max;
  for (int i = 0; i < kAzimuthCells; ++i)
    for (int j = 0; j < kElevationCells; ++j)
      if (part.has_point[SphericalPartition::flat(i, j)])
        fc.points.push_back(part.nearest[SphericalPartition::flat(i, j)]);
  return fc;
}

FilteredCloud to_world_frame(const FilteredCloud& fc, const State& pose) {
  if (fc.frame == FilteredCloud::Frame::world) return fc;
  FilteredCloud out;
  out.frame = FilteredCloud::Frame::world;
  out.r_max = fc.r_max;
  out.points.reserve(fc.points.size());
  const Eigen::Matrix3d body_to_world = pose.q.toRotationMatrix();
  for (const auto& p : fc.points) out.points.push_back(pose.p + body_to_world * p);
  return out;
}

double clearance(const FilteredCloud& fc, const Vec3& p) {
  if (fc.points.empty()) return fc.far_clearance();
  double best2 = std::numeric_limits<double>::infinity();
  for (const auto& q : fc.points) best2 = std::min(best2, (p - q).squaredNorm());
  return std::sqrt(best2);
}

ClearanceIndex::ClearanceIndex(const FilteredCloud& fc, double cell_size) {
  far_ = fc.far_clearance();
  if (fc.points.empty()) return;

  Vec3 lo = fc.points.front();
  Vec3 hi = fc.points.front();
  for (const auto& p : fc.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 extent = hi - lo;
  cell_ = std::max(cell_size, extent.maxCoeff() / 96.0);
  origin_ = lo;
  for (int a = 0; a < 3; ++a)
    dims_[a] = std::max(1, static_cast<int>(std::floor(extent[a] / cell_)) + 1);

  const int n_cells = dims_[0] * dims_[1] * dims_[2];
  std::vector<std::int32_t> counts(n_cells, 0);
  auto flat_cell = [&](const Vec3& p) {
    int c[3];
    for (int a = 0; a < 3; ++a)
      c[a] = std::clamp(static_cast<int>(std::floor((p[a] - origin_[a]) / cell_)),
                        0, dims_[a] - 1);
    return (c[0] * dims_[1] + c[1]) * dims_[2] + c[2];
  };
  for (const auto& p : fc.points) ++counts[flat_cell(p)];

  cell_start_.assign(n_cells + 1, 0);
  for (int c = 0; c < n_cells; ++c) cell_start_[c + 1] = cell_start_[c] + counts[c];
  points_.resize(fc.points.size());
  std::vector<std::int32_t> cursor(cell_start_.begin(), cell_start_.end() - 1);
  for (const auto& p : fc.points) points_[cursor[flat_cell(p)]++] = p;
}

int ClearanceIndex::cell_of(const Vec3& p, int axis) const {
  return static_cast<int>(std::floor((p[axis] - origin_[axis]) / cell_));
}

double ClearanceIndex::nearest(const Vec3& p) const {
  if (points_.empty()) return far_;

  const int cx = cell_of(p, 0);
  const int cy = cell_of(p, 1);
  const int cz = cell_of(p, 2);

  // First ring that intersects the grid, and the last ring that can.
  auto ring_to_box = [](int c, int dim) {
    return std::max({0, -c, c - (dim - 1)});
  };
  auto ring_from_box = [](int c, int dim) {
    return std::max(std::abs(c), std::abs(c - (dim - 1)));
  };
  const int first_ring = std::max({ring_to_box(cx, dims_[0]),
                                   ring_to_box(cy, dims_[1]),
                                   ring_to_box(cz, dims_[2])});
  const int last_ring = std::max({ring_from_box(cx, dims_[0]),
                                  ring_from_box(cy, dims_[1]),
                                  ring_from_box(cz, dims_[2])});

  double best2 = std::numeric_limits<double>::infinity();
  for (int r = first_ring; r <= last_ring; ++r) {
    // Unvisited cells are at Chebyshev distance >= r, hence >= (r-1)*cell_.
    if (r > first_ring) {
      const double bound = (r - 1) * cell_;
      if (best2 <= bound * bound) break;
    }
    const int x0 = std::max(cx - r, 0), x1 = std::min(cx + r, dims_[0] - 1);
    const int y0 = std::max(cy - r, 0), y1 = std::min(cy + r, dims_[1] - 1);
    const int z0 = std::max(cz - r, 0), z1 = std::min(cz + r, dims_[2] - 1);
    for (int x = x0; x <= x1; ++x) {
      for (int y = y0; y <= y1; ++y) {
        const bool face_xy = (std::abs(x - cx) == r) || (std::abs(y - cy) == r);
        for (int z = z0; z <= z1; ++z) {
          if (!face_xy && std::abs(z - cz) != r) continue;
          const int c = (x * dims_[1] + y) * dims_[2] + z;
          for (std::int32_t k = cell_start_[c]; k < cell_start_[c + 1]; ++k)
            best2 = std::min(best2, (p - points_[k]).squaredNorm());
        }
      }
    }
  }
  return std::sqrt(best2);
}

PerceptionSnapshot build_snapshot(const PointCloudBuffer& buffer,
                                  const State& pose, double r_max) {
  PerceptionSnapshot snap;
  snap.pose = pose;
  snap.partition = build_partition(buffer.body_points(pose), r_max);
  snap.coarse = pool_coarse(snap.partition);
  snap.filtered = to_world_frame(filtered_cloud(snap.partition), pose);
  snap.clearance_index = ClearanceIndex(snap.filtered);
  return snap;
}

}  // namespace amppi
