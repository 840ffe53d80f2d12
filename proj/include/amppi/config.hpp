#pragma once

#include <string>

#include "amppi/ensemble.hpp"

namespace amppi {

/// All defaults: the published parameter set.
EnsembleConfig default_config();

// JSON config with the canonical parameter names (m, Ft_min, Ft_max,
// omega_xy_max, omega_z_max, sigma_Ft, sigma_omega_xy, sigma_omega_z, dt, K,
// N, lambda, Q_p, Q_v, Q_q, Q_vnorm, Q_track, Q_c, Q_cdelta, lookahead, C, a,
// d_obs_min, d_obs_max) plus optional harness keys (m_h, m_v, spacing_deg,
// terminal_speed, replan_hz, r_max, iterations). Missing keys keep defaults;
// unknown keys are rejected.
EnsembleConfig config_from_json(const std::string& text);
std::string config_to_json(const EnsembleConfig& cfg);

EnsembleConfig load_config(const std::string& path);
void save_config(const EnsembleConfig& cfg, const std::string& path);

}  // namespace amppi
