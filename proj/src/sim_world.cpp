#include "amppi/sim_world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "amppi/perception.hpp"
#include "amppi/rng.hpp"

namespace amppi {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRayEps = 1e-9;

struct LocalFrame {
  Eigen::Matrix3d world_to_local;
  Vec3 origin;
};

LocalFrame local_frame(const ObstaclePrimitive& prim) {
  return {prim.rotation().toRotationMatrix().transpose(), prim.base};
}

// Signed distance of a capped cylinder with base at z=0, axis +z.
double cylinder_sdf(const Vec3& q, double radius, double height) {
  const double radial = std::sqrt(q.x() * q.x() + q.y() * q.y());
  const double dx = radial - radius;
  const double dz = std::abs(q.z() - 0.5 * height) - 0.5 * height;
  const double outside =
      std::sqrt(std::pow(std::max(dx, 0.0), 2) + std::pow(std::max(dz, 0.0), 2));
  const double inside = std::min(std::max(dx, dz), 0.0);
  return outside + inside;
}

double box_sdf(const Vec3& q, const Vec3& half_extents) {
  const Vec3 d = q.cwiseAbs() - half_extents;
  const double outside = d.cwiseMax(0.0).norm();
  const double inside = std::min(d.maxCoeff(), 0.0);
  return outside + inside;
}

double ray_capped_cylinder(const Vec3& o, const Vec3& d, double radius,
                           double height, double t_max) {
  // origin inside the solid: no return
  if (o.x() * o.x() + o.y() * o.y() <= radius * radius && o.z() >= 0.0 &&
      o.z() <= height)
    return kInf;

  double best = kInf;
  const double a = d.x() * d.x() + d.y() * d.y();
  const double c = o.x() * o.x() + o.y() * o.y() - radius * radius;
  if (a > 1e-14) {
    const double b = 2.0 * (o.x() * d.x() + o.y() * d.y());
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      for (double t : {(-b - root) / (2.0 * a), (-b + root) / (2.0 * a)}) {
        if (t > kRayEps && t < best) {
          const double z = o.z() + t * d.z();
          if (z >= 0.0 && z <= height) best = t;
        }
      }
    }
  }
  if (std::abs(d.z()) > 1e-14) {
    for (double plane : {0.0, height}) {
      const double t = (plane - o.z()) / d.z();
      if (t > kRayEps && t < best) {
        const double x = o.x() + t * d.x();
        const double y = o.y() + t * d.y();
        if (x * x + y * y <= radius * radius) best = t;
      }
    }
  }
  return best <= t_max ? best : kInf;
}

double ray_box(const Vec3& o, const Vec3& d, const Vec3& center,
               const Vec3& half_extents, double t_max) {
  double tmin = -kInf, tmax = kInf;
  for (int axis = 0; axis < 3; ++axis) {
    const double lo = center[axis] - half_extents[axis];
    const double hi = center[axis] + half_extents[axis];
    if (std::abs(d[axis]) < 1e-14) {
      if (o[axis] < lo || o[axis] > hi) return kInf;
      continue;
    }
    double t0 = (lo - o[axis]) / d[axis];
    double t1 = (hi - o[axis]) / d[axis];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return kInf;
  }
  if (tmin <= kRayEps) return kInf;  // behind, or origin inside
  return tmin <= t_max ? tmin : kInf;
}

void primitive_aabb(const ObstaclePrimitive& prim, Vec3& lo, Vec3& hi) {
  if (prim.kind == PrimitiveKind::box) {
    lo = prim.base - prim.half_extents;
    hi = prim.base + prim.half_extents;
    return;
  }
  const Vec3 tip = prim.base + prim.rotation() * Vec3(0, 0, prim.height);
  lo = prim.base.cwiseMin(tip) - Vec3::Constant(prim.radius);
  hi = prim.base.cwiseMax(tip) + Vec3::Constant(prim.radius);
}

double aabb_distance(const Vec3& lo, const Vec3& hi, const Vec3& p) {
  const Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
  return d.norm();
}

}  // namespace

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "empty") return ScenarioKind::empty;
  if (name == "forest") return ScenarioKind::forest;
  if (name == "verticals") return ScenarioKind::verticals;
  if (name == "inclines") return ScenarioKind::inclines;
  if (name == "two_gap") return ScenarioKind::two_gap;
  throw std::invalid_argument("unknown scenario kind: " + name);
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::empty: return "empty";
    case ScenarioKind::forest: return "forest";
    case ScenarioKind::verticals: return "verticals";
    case ScenarioKind::inclines: return "inclines";
    case ScenarioKind::two_gap: return "two_gap";
  }
  return "empty";
}

double surface_distance(const ObstaclePrimitive& prim, const Vec3& p) {
  if (prim.kind == PrimitiveKind::box)
    return std::abs(box_sdf(p - prim.base, prim.half_extents));
  const LocalFrame f = local_frame(prim);
  return std::abs(
      cylinder_sdf(f.world_to_local * (p - f.origin), prim.radius, prim.height));
}

double true_clearance(const Scenario& scene, const Vec3& p) {
  double best = kInf;
  for (const auto& prim : scene.obstacles)
    best = std::min(best, surface_distance(prim, p));
  return best;
}

bool check_collision(const Scenario& scene, const Vec3& p, double drone_radius) {
  return true_clearance(scene, p) < drone_radius;
}

double ray_hit(const ObstaclePrimitive& prim, const Vec3& origin,
               const Vec3& dir, double t_max) {
  if (prim.kind == PrimitiveKind::box)
    return ray_box(origin, dir, prim.base, prim.half_extents, t_max);
  const LocalFrame f = local_frame(prim);
  return ray_capped_cylinder(f.world_to_local * (origin - f.origin),
                             f.world_to_local * dir, prim.radius, prim.height,
                             t_max);
}

Scenario generate_cylinder_field(const CylinderFieldParams& params,
                                 std::uint64_t seed, const std::string& label) {
  Scenario scene;
  scene.kind = label;
  scene.seed = seed;
  RandomStream rs = RandomStream::derive(seed, 0x5CE9A210u);

  for (int i = 0; i < params.count; ++i) {
    ObstaclePrimitive prim;
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      prim.kind = params.tilt_max > 0.0 ? PrimitiveKind::tilted_cylinder
                                        : PrimitiveKind::vertical_cylinder;
      prim.base = Vec3(rs.uniform(scene.placement_min.x(), scene.placement_max.x()),
                       rs.uniform(scene.placement_min.y(), scene.placement_max.y()),
                       0.0);
      prim.radius = rs.uniform(params.radius_min, params.radius_max);
      prim.height = params.height_min == params.height_max
                        ? params.height_min
                        : rs.uniform(params.height_min, params.height_max);
      if (params.tilt_max > 0.0) {
        prim.tilt_angle = rs.uniform(0.0, params.tilt_max);
        const double axis_az = rs.uniform(0.0, 2.0 * kPi);
        prim.tilt_axis = Vec3(std::cos(axis_az), std::sin(axis_az), 0.0);
      }
      placed = surface_distance(prim, scene.start) >= 1.0 &&
               surface_distance(prim, scene.goal) >= 1.0;
    }
    if (!placed)
      throw std::runtime_error("cannot place obstacle clear of start/goal");
    scene.obstacles.push_back(prim);
  }
  return scene;
}

Scenario generate_scenario(ScenarioKind kind, std::uint64_t seed) {
  CylinderFieldParams params;
  switch (kind) {
    case ScenarioKind::empty: {
      Scenario scene;
      scene.kind = "empty";
      scene.seed = seed;
      return scene;
    }
    case ScenarioKind::forest:
      params = {100, 0.1, 0.5, 3.0, 8.0, 30.0 * kPi / 180.0};
      return generate_cylinder_field(params, seed, "forest");
    case ScenarioKind::verticals:
      params = {1000, 0.4, 1.1, 6.0, 6.0, 0.0};
      return generate_cylinder_field(params, seed, "verticals");
    case ScenarioKind::inclines:
      params = {800, 0.06, 0.3, 10.0, 10.0, 30.0 * kPi / 180.0};
      return generate_cylinder_field(params, seed, "inclines");
    case ScenarioKind::two_gap: {
      // wall across the path with two 3 m corridors at y = ±3.5
      Scenario scene;
      scene.kind = "two_gap";
      scene.seed = seed;
      auto wall_segment = [](double y_lo, double y_hi) {
        ObstaclePrimitive seg;
        seg.kind = PrimitiveKind::box;
        seg.base = Vec3(20.0, 0.5 * (y_lo + y_hi), 4.0);
        seg.half_extents = Vec3(0.2, 0.5 * (y_hi - y_lo), 4.0);
        return seg;
      };
      scene.obstacles.push_back(wall_segment(-20.0, -5.0));
      scene.obstacles.push_back(wall_segment(-2.0, 2.0));
      scene.obstacles.push_back(wall_segment(5.0, 20.0));
      return scene;
    }
  }
  throw std::invalid_argument("unknown scenario kind");
}

std::vector<Vec3> lidar_scan(const Scenario& scene, const State& pose,
                             const LidarModel& model, std::uint64_t frame_seed) {
  std::vector<Vec3> returns;
  if (scene.obstacles.empty()) return returns;

  // near set: anything whose box comes within the sensing radius
  std::vector<int> near;
  std::vector<Vec3> lo(scene.obstacles.size()), hi(scene.obstacles.size());
  for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
    primitive_aabb(scene.obstacles[i], lo[i], hi[i]);
    if (aabb_distance(lo[i], hi[i], pose.p) <= model.r_max)
      near.push_back(static_cast<int>(i));
  }
  if (near.empty()) return returns;

  // coarse rejection: azimuth columns each near obstacle can appear in
  const double az_step = 2.0 * kPi / kAzimuthCells;
  std::vector<std::vector<int>> columns(kAzimuthCells);
  for (int idx : near) {
    const ObstaclePrimitive& prim = scene.obstacles[idx];
    Eigen::Vector2d c2;
    double rad;
    if (prim.kind == PrimitiveKind::box) {
      c2 = prim.base.head<2>();
      rad = prim.half_extents.head<2>().norm();
    } else {
      const Vec3 tip = prim.base + prim.rotation() * Vec3(0, 0, prim.height);
      c2 = 0.5 * (prim.base.head<2>() + tip.head<2>());
      rad = 0.5 * (prim.base.head<2>() - tip.head<2>()).norm() + prim.radius;
    }
    const Eigen::Vector2d rel = c2 - pose.p.head<2>();
    const double dist = rel.norm();
    if (dist <= rad + 1e-9) {
      for (int i = 0; i < kAzimuthCells; ++i) columns[i].push_back(idx);
      continue;
    }
    const double half = std::asin(std::min(1.0, rad / dist)) + az_step;
    const double bearing = std::atan2(rel.y(), rel.x());
    const int i0 = static_cast<int>(std::floor((bearing - half + kPi) / az_step));
    const int i1 = static_cast<int>(std::floor((bearing + half + kPi) / az_step));
    for (int ii = i0; ii <= i1 && ii - i0 < kAzimuthCells; ++ii)
      columns[((ii % kAzimuthCells) + kAzimuthCells) % kAzimuthCells].push_back(idx);
  }

  const double el_step = kPi / kElevationCells;
  const double el_min = model.elevation_min_deg * kPi / 180.0;
  const double el_max = model.elevation_max_deg * kPi / 180.0;

  for (int j = 0; j < kElevationCells; ++j) {
    const double el_center = -0.5 * kPi + (j + 0.5) * el_step;
    if (el_center < el_min || el_center > el_max) continue;
    for (int i = 0; i < kAzimuthCells; ++i) {
      RandomStream rs = RandomStream::derive(
          frame_seed, 0x11DA2u, static_cast<std::uint64_t>(i * kElevationCells + j));
      const double az = -kPi + (i + rs.uniform()) * az_step;
      const double el = -0.5 * kPi + (j + rs.uniform()) * el_step;
      const Vec3 dir = pose.q * direction_from_angles(az, el);

      double best = kInf;
      const double dir_xy = std::sqrt(dir.x() * dir.x() + dir.y() * dir.y());
      if (dir_xy < 1e-12) {
        for (int idx : near)
          best = std::min(best,
                          ray_hit(scene.obstacles[idx], pose.p, dir, model.r_max));
      } else {
        const int col = azimuth_cell(std::atan2(dir.y(), dir.x()));
        for (int idx : columns[col])
          best = std::min(best,
                          ray_hit(scene.obstacles[idx], pose.p, dir, model.r_max));
      }
      if (std::isfinite(best)) {
        const double noise = std::clamp(rs.normal(0.0, model.range_sigma),
                                        -4.0 * model.range_sigma,
                                        4.0 * model.range_sigma);
        const double range = std::max(best + noise, 1e-3);
        returns.push_back(pose.p + range * dir);
      }
    }
  }
  return returns;
}

namespace {

nlohmann::json vec_to_json(const Vec3& v) {
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}

Vec3 vec_from_json(const nlohmann::json& j) {
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

std::string kind_name(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::vertical_cylinder: return "vertical_cylinder";
    case PrimitiveKind::tilted_cylinder: return "tilted_cylinder";
    case PrimitiveKind::box: return "box";
  }
  return "vertical_cylinder";
}

PrimitiveKind kind_from_name(const std::string& name) {
  if (name == "vertical_cylinder") return PrimitiveKind::vertical_cylinder;
  if (name == "tilted_cylinder") return PrimitiveKind::tilted_cylinder;
  if (name == "box") return PrimitiveKind::box;
  throw std::invalid_argument("unknown primitive kind: " + name);
}

}  // namespace

std::string scenario_to_json(const Scenario& scene) {
  nlohmann::json j;
  j["kind"] = scene.kind;
  j["seed"] = scene.seed;
  j["placement_min"] = vec_to_json(scene.placement_min);
  j["placement_max"] = vec_to_json(scene.placement_max);
  j["start"] = vec_to_json(scene.start);
  j["goal"] = vec_to_json(scene.goal);
  j["obstacles"] = nlohmann::json::array();
  for (const auto& prim : scene.obstacles) {
    nlohmann::json o;
    o["kind"] = kind_name(prim.kind);
    o["base"] = vec_to_json(prim.base);
    o["radius"] = prim.radius;
    o["height"] = prim.height;
    o["half_extents"] = vec_to_json(prim.half_extents);
    o["tilt_axis"] = vec_to_json(prim.tilt_axis);
    o["tilt_angle"] = prim.tilt_angle;
    j["obstacles"].push_back(std::move(o));
  }
  return j.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  Scenario scene;
  scene.kind = j.at("kind").get<std::string>();
  scene.seed = j.at("seed").get<std::uint64_t>();
  scene.placement_min = vec_from_json(j.at("placement_min"));
  scene.placement_max = vec_from_json(j.at("placement_max"));
  scene.start = vec_from_json(j.at("start"));
  scene.goal = vec_from_json(j.at("goal"));
  for (const auto& o : j.at("obstacles")) {
    ObstaclePrimitive prim;
    prim.kind = kind_from_name(o.at("kind").get<std::string>());
    prim.base = vec_from_json(o.at("base"));
    prim.radius = o.at("radius").get<double>();
    prim.height = o.at("height").get<double>();
    prim.half_extents = vec_from_json(o.at("half_extents"));
    prim.tilt_axis = vec_from_json(o.at("tilt_axis"));
    prim.tilt_angle = o.at("tilt_angle").get<double>();
    scene.obstacles.push_back(prim);
  }
  return scene;
}

void save_scenario(const Scenario& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << scenario_to_json(scene) << "\n";
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read scenario file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return scenario_from_json(text);
}

}  // namespace amppi
