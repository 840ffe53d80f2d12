#include "amppi/mppi.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace amppi {

void RolloutBatch::resize(const MppiConfig& cfg) {
  perturbations.resize(static_cast<std::size_t>(cfg.rollouts) * cfg.horizon);
  trajectories.resize(cfg.rollouts);
  costs.resize(cfg.rollouts);
  weights.resize(cfg.rollouts);
}

void sample_rollout_perturbations(const MppiConfig& cfg, const StreamKey& key,
                                  int k, std::span<Vec4> out) {
  RandomStream rs = RandomStream::derive(key.seed, key.instance, key.cycle,
                                         static_cast<std::uint64_t>(k));
  for (int j = 0; j < cfg.horizon; ++j)
    for (int c = 0; c < 4; ++c) out[j][c] = cfg.sigma[c] * rs.normal();
}

std::vector<Vec4> sample_perturbations(const MppiConfig& cfg,
                                       const StreamKey& key) {
  std::vector<Vec4> all(static_cast<std::size_t>(cfg.rollouts) * cfg.horizon);
  for (int k = 0; k < cfg.rollouts; ++k)
    sample_rollout_perturbations(
        cfg, key, k, std::span<Vec4>(all.data() + k * cfg.horizon, cfg.horizon));
  return all;
}

void rollout_into(Rollout& r, const State& x0, const NominalSequence& nominal,
                  std::span<Vec4> delta, const DynamicsParams& prm) {
  const int n = static_cast<int>(delta.size());
  r.dt = prm.dt;
  r.valid = true;
  r.states.resize(n + 1);
  r.controls.resize(n);
  r.states[0] = x0;

  for (int j = 0; j < n; ++j) {
    const Vec4 nominal_u = nominal.controls[j].vec();
    const ControlInput applied =
        clamp_control(ControlInput::from_vec(nominal_u + delta[j]), prm);
    delta[j] = applied.vec() - nominal_u;  // what was actually simulated
    r.controls[j] = applied;

    State next = detail::rk4_step_raw(r.states[j], applied, prm);
    next.q.normalize();
    if (!next.finite()) {
      r.valid = false;
      for (int rest = j; rest < n; ++rest) {
        r.states[rest + 1] = r.states[j];
        r.controls[rest] = applied;
      }
      return;
    }
    r.states[j + 1] = next;
  }
}

Rollout rollout(const State& x0, const NominalSequence& nominal,
                std::span<Vec4> delta, const DynamicsParams& prm) {
  Rollout r;
  rollout_into(r, x0, nominal, delta, prm);
  return r;
}

std::vector<double> compute_weights(const std::vector<double>& costs,
                                    double lambda) {
  double rho = std::numeric_limits<double>::infinity();
  for (double c : costs)
    if (std::isfinite(c)) rho = std::min(rho, c);
  if (!std::isfinite(rho)) throw std::runtime_error("no valid rollout");

  std::vector<double> weights(costs.size(), 0.0);
  double eta = 0.0;
  for (std::size_t k = 0; k < costs.size(); ++k) {
    if (std::isfinite(costs[k])) {
      weights[k] = std::exp(-(costs[k] - rho) / lambda);
      eta += weights[k];
    }
  }
  for (double& w : weights) w /= eta;
  return weights;
}

void update_nominal(NominalSequence& nominal, std::span<const Vec4> deltas,
                    const std::vector<double>& weights,
                    const DynamicsParams& prm) {
  const int n = static_cast<int>(nominal.controls.size());
  const int k_count = static_cast<int>(weights.size());
  for (int j = 0; j < n; ++j) {
    Vec4 du = Vec4::Zero();
    for (int k = 0; k < k_count; ++k)
      du += weights[k] * deltas[static_cast<std::size_t>(k) * n + j];
    nominal.controls[j] = clamp_control(
        ControlInput::from_vec(nominal.controls[j].vec() + du), prm);
  }
}

NominalSequence shift_nominal(const NominalSequence& nominal) {
  NominalSequence out;
  if (nominal.controls.empty()) return out;
  out.controls.assign(nominal.controls.begin() + 1, nominal.controls.end());
  out.controls.push_back(nominal.controls.back());
  return out;
}

}  // namespace amppi
