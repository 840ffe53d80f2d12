#include "amppi/config.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace amppi {

EnsembleConfig default_config() { return EnsembleConfig{}; }

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

EnsembleConfig config_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  static const char* known[] = {
      "m",        "Ft_min",        "Ft_max",       "omega_xy_max",
      "omega_z_max", "sigma_Ft",   "sigma_omega_xy", "sigma_omega_z",
      "dt",       "K",             "N",            "lambda",
      "Q_p",      "Q_v",           "Q_q",          "Q_vnorm",
      "Q_track",  "Q_c",           "Q_cdelta",     "lookahead",
      "C",        "a",             "d_obs_min",    "d_obs_max",
      "m_h",      "m_v",           "spacing_deg",  "terminal_speed",
      "replan_hz", "r_max",        "iterations"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok) throw std::invalid_argument("unknown config key: " + it.key());
  }

  EnsembleConfig cfg;
  read(j, "m", cfg.dynamics.mass);
  read(j, "Ft_min", cfg.dynamics.thrust_min);
  read(j, "Ft_max", cfg.dynamics.thrust_max);
  read(j, "omega_xy_max", cfg.dynamics.omega_xy_max);
  read(j, "omega_z_max", cfg.dynamics.omega_z_max);
  read(j, "sigma_Ft", cfg.mppi.sigma[0]);
  if (j.contains("sigma_omega_xy")) {
    cfg.mppi.sigma[1] = j.at("sigma_omega_xy").get<double>();
    cfg.mppi.sigma[2] = cfg.mppi.sigma[1];
  }
  read(j, "sigma_omega_z", cfg.mppi.sigma[3]);
  if (j.contains("dt")) {
    cfg.dynamics.dt = j.at("dt").get<double>();
    cfg.mppi.dt = cfg.dynamics.dt;
  }
  read(j, "K", cfg.mppi.rollouts);
  read(j, "N", cfg.mppi.horizon);
  read(j, "lambda", cfg.mppi.lambda);
  read(j, "Q_p", cfg.weights.q_p);
  read(j, "Q_v", cfg.weights.q_v);
  read(j, "Q_q", cfg.weights.q_q);
  read(j, "Q_vnorm", cfg.weights.q_vnorm);
  read(j, "Q_track", cfg.weights.q_track);
  read(j, "Q_c", cfg.weights.q_c);
  read(j, "Q_cdelta", cfg.weights.q_c_delta);
  read(j, "lookahead", cfg.grid.lookahead);
  read(j, "C", cfg.weights.collision.scale);
  read(j, "a", cfg.weights.collision.slope);
  read(j, "d_obs_min", cfg.weights.collision.d_min);
  read(j, "d_obs_max", cfg.weights.collision.d_max);
  read(j, "m_h", cfg.grid.m_h);
  read(j, "m_v", cfg.grid.m_v);
  read(j, "spacing_deg", cfg.grid.spacing_deg);
  read(j, "terminal_speed", cfg.grid.terminal_speed);
  read(j, "replan_hz", cfg.replan_hz);
  read(j, "r_max", cfg.r_max);
  read(j, "iterations", cfg.mppi.iterations);

  if (cfg.dynamics.mass <= 0.0 || cfg.dynamics.dt <= 0.0)
    throw std::invalid_argument("mass and dt must be positive");
  if (cfg.mppi.rollouts < 1 || cfg.mppi.horizon < 2)
    throw std::invalid_argument("K must be >= 1 and N >= 2");
  if (cfg.mppi.lambda <= 0.0)
    throw std::invalid_argument("lambda must be positive");
  if (cfg.weights.collision.d_min >= cfg.weights.collision.d_max)
    throw std::invalid_argument("d_obs_min must be below d_obs_max");
  return cfg;
}

std::string config_to_json(const EnsembleConfig& cfg) {
  nlohmann::json j;
  j["m"] = cfg.dynamics.mass;
  j["Ft_min"] = cfg.dynamics.thrust_min;
  j["Ft_max"] = cfg.dynamics.thrust_max;
  j["omega_xy_max"] = cfg.dynamics.omega_xy_max;
  j["omega_z_max"] = cfg.dynamics.omega_z_max;
  j["sigma_Ft"] = cfg.mppi.sigma[0];
  j["sigma_omega_xy"] = cfg.mppi.sigma[1];
  j["sigma_omega_z"] = cfg.mppi.sigma[3];
  j["dt"] = cfg.mppi.dt;
  j["K"] = cfg.mppi.rollouts;
  j["N"] = cfg.mppi.horizon;
  j["lambda"] = cfg.mppi.lambda;
  j["Q_p"] = cfg.weights.q_p;
  j["Q_v"] = cfg.weights.q_v;
  j["Q_q"] = cfg.weights.q_q;
  j["Q_vnorm"] = cfg.weights.q_vnorm;
  j["Q_track"] = cfg.weights.q_track;
  j["Q_c"] = cfg.weights.q_c;
  j["Q_cdelta"] = cfg.weights.q_c_delta;
  j["lookahead"] = cfg.grid.lookahead;
  j["C"] = cfg.weights.collision.scale;
  j["a"] = cfg.weights.collision.slope;
  j["d_obs_min"] = cfg.weights.collision.d_min;
  j["d_obs_max"] = cfg.weights.collision.d_max;
  j["m_h"] = cfg.grid.m_h;
  j["m_v"] = cfg.grid.m_v;
  j["spacing_deg"] = cfg.grid.spacing_deg;
  j["terminal_speed"] = cfg.grid.terminal_speed;
  j["replan_hz"] = cfg.replan_hz;
  j["r_max"] = cfg.r_max;
  j["iterations"] = cfg.mppi.iterations;
  return j.dump(2);
}

EnsembleConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return config_from_json(text);
}

void save_config(const EnsembleConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << config_to_json(cfg) << "\n";
}

}  // namespace amppi
