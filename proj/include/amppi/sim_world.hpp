#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amppi/types.hpp"

namespace amppi {

enum class PrimitiveKind { vertical_cylinder, tilted_cylinder, box };

struct ObstaclePrimitive {
  PrimitiveKind kind{PrimitiveKind::vertical_cylinder};
  Vec3 base{Vec3::Zero()};  // cylinder base-center, or box center
  double radius{0.5};       // cylinders, m
  double height{6.0};       // cylinders, m
  Vec3 half_extents{Vec3::Ones()};  // boxes, m
  Vec3 tilt_axis{Vec3::UnitX()};    // horizontal unit axis, tilted cylinders
  double tilt_angle{0.0};           // rad

  // local-to-world rotation (identity for vertical cylinders and boxes)
  Quat rotation() const {
    if (kind == PrimitiveKind::tilted_cylinder && tilt_angle != 0.0)
      return Quat(Eigen::AngleAxisd(tilt_angle, tilt_axis.normalized()));
    return Quat::Identity();
  }
};

struct Scenario {
  std::string kind{"empty"};
  std::uint64_t seed{0};
  // obstacle placement region (ground plane z = 0)
  Vec3 placement_min{2.5, -20.0, 0.0};
  Vec3 placement_max{42.5, 20.0, 0.0};
  Vec3 start{0.0, 0.0, 2.0};
  Vec3 goal{45.0, 0.0, 2.0};
  std::vector<ObstaclePrimitive> obstacles;
};

enum class ScenarioKind { empty, forest, verticals, inclines, two_gap };

ScenarioKind scenario_kind_from_string(const std::string& name);
std::string to_string(ScenarioKind kind);

struct CylinderFieldParams {
  int count{0};
  double radius_min{0.4};
  double radius_max{1.1};
  double height_min{6.0};
  double height_max{6.0};
  double tilt_max{0.0};  // rad; 0 keeps cylinders vertical
};

/// Seeded uniform placement; obstacles closer than 1 m to start or goal are
/// redrawn. Identical (params, seed) produce identical scenarios.
Scenario generate_cylinder_field(const CylinderFieldParams& params,
                                 std::uint64_t seed, const std::string& label);

Scenario generate_scenario(ScenarioKind kind, std::uint64_t seed);

/// Exact Euclidean distance from p to the primitive surface (also defined
/// inside the solid: distance to the nearest surface point).
double surface_distance(const ObstaclePrimitive& prim, const Vec3& p);

/// Distance to the nearest obstacle surface; +inf for an empty scene.
double true_clearance(const Scenario& scene, const Vec3& p);

bool check_collision(const Scenario& scene, const Vec3& p,
                     double drone_radius = 0.2);

/// First hit parameter t along origin + t*dir (unit dir), or +inf. Rays
/// starting inside a primitive report no hit.
double ray_hit(const ObstaclePrimitive& prim, const Vec3& origin,
               const Vec3& dir, double t_max);

struct LidarModel {
  double r_max{10.0};
  double elevation_min_deg{-45.0};
  double elevation_max_deg{45.0};
  double range_sigma{0.01};  // m, truncated at ±4σ
};

/// One simulated frame: per 3° cell inside the elevation mask, one ray
/// jittered uniformly within the cell, cast from the pose in the body
/// frame. Nearest intersection within r_max yields one world-frame point
/// with truncated Gaussian range noise; misses yield nothing.
std::vector<Vec3> lidar_scan(const Scenario& scene, const State& pose,
                             const LidarModel& model, std::uint64_t frame_seed);

// Lossless JSON round trip.
std::string scenario_to_json(const Scenario& scene);
Scenario scenario_from_json(const std::string& text);
void save_scenario(const Scenario& scene, const std::string& path);
Scenario load_scenario(const std::string& path);

}  // namespace amppi
