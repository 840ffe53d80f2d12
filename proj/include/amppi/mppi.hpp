#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "amppi/costs.hpp"
#include "amppi/dynamics.hpp"
#include "amppi/parallel.hpp"
#include "amppi/rng.hpp"

namespace amppi {

struct MppiConfig {
  int rollouts{128};               // K
  int horizon{25};                 // N
  double lambda{0.1};              // softmin temperature
  Vec4 sigma{1.0, 1.0, 1.0, 0.5};  // stddev per channel (F_t, ωx, ωy, ωz)
  double dt{0.05};                 // s, matches DynamicsParams::dt
  int iterations{1};               // optimizer passes per replan cycle
};

struct NominalSequence {
  std::vector<ControlInput> controls;

  static NominalSequence constant(const ControlInput& u, int horizon) {
    NominalSequence n;
    n.controls.assign(horizon, u);
    return n;
  }
};

// Names the random stream of one (instance, cycle) pair; rollout k within it
// draws from the sub-stream (seed, instance, cycle, k).
struct StreamKey {
  std::uint64_t seed{0};
  std::uint64_t instance{0};
  std::uint64_t cycle{0};
};

// Reusable per-instance workspace for one MPPI update.
struct RolloutBatch {
  std::vector<Vec4> perturbations;   // K*N; applied (post-clamp) after rollout
  std::vector<Rollout> trajectories; // K
  std::vector<double> costs;         // K
  std::vector<double> weights;       // K

  void resize(const MppiConfig& cfg);
};

/// Fills rollout k's N perturbation rows from the counter stream
/// (seed, instance, cycle, k).
void sample_rollout_perturbations(const MppiConfig& cfg, const StreamKey& key,
                                  int k, std::span<Vec4> out);

/// All K*N draws, rollout-major.
std::vector<Vec4> sample_perturbations(const MppiConfig& cfg,
                                       const StreamKey& key);

/// Simulates one perturbed control sequence. delta holds the sampled
/// perturbations on entry and the applied (post-clamp) ones on return, so
/// the nominal update uses exactly what was simulated. A non-finite state
/// marks the rollout invalid.
void rollout_into(Rollout& r, const State& x0, const NominalSequence& nominal,
                  std::span<Vec4> delta, const DynamicsParams& prm);

Rollout rollout(const State& x0, const NominalSequence& nominal,
                std::span<Vec4> delta, const DynamicsParams& prm);

/// Softmin weights ε_k = exp(−(S_k − min S)/λ) / η; +∞ (invalid) rollouts get
/// weight zero. Throws "no valid rollout" when every cost is +∞.
std::vector<double> compute_weights(const std::vector<double>& costs,
                                    double lambda);

/// u_nom ← clamp(u_nom + Σ_k ε_k δ_k).
void update_nominal(NominalSequence& nominal, std::span<const Vec4> deltas,
                    const std::vector<double>& weights,
                    const DynamicsParams& prm);

/// Receding-horizon warm start: drop the first entry, repeat the last.
NominalSequence shift_nominal(const NominalSequence& nominal);

struct MppiDiagnostics {
  double min_cost{0.0};
  double mean_cost{0.0};
  double ess{0.0};  // effective sample size 1/Σ ε²
};

/// One complete MPPI update: sample, roll out, weigh, update. The cost
/// functor is evaluated concurrently and must be pure. Throws
/// "no valid rollout" when no rollout propagates to finite states.
template <typename CostFn>
MppiDiagnostics mppi_step(NominalSequence& nominal, const State& x0,
                          const MppiConfig& cfg, const DynamicsParams& prm,
                          const StreamKey& key, CostFn&& cost,
                          RolloutBatch& batch) {
  batch.resize(cfg);
  const int n = cfg.horizon;
  parallel_for(cfg.rollouts, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      std::span<Vec4> delta(batch.perturbations.data() + k * n, n);
      sample_rollout_perturbations(cfg, key, static_cast<int>(k), delta);
      rollout_into(batch.trajectories[k], x0, nominal, delta, prm);
      batch.costs[k] = batch.trajectories[k].valid
                           ? cost(batch.trajectories[k])
                           : std::numeric_limits<double>::infinity();
    }
  });
  batch.weights = compute_weights(batch.costs, cfg.lambda);
  update_nominal(nominal, batch.perturbations, batch.weights, prm);

  MppiDiagnostics diag;
  diag.min_cost = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  int finite = 0;
  double w2 = 0.0;
  for (int k = 0; k < cfg.rollouts; ++k) {
    if (std::isfinite(batch.costs[k])) {
      diag.min_cost = std::min(diag.min_cost, batch.costs[k]);
      sum += batch.costs[k];
      ++finite;
    }
    w2 += batch.weights[k] * batch.weights[k];
  }
  diag.mean_cost = finite > 0 ? sum / finite : diag.min_cost;
  diag.ess = w2 > 0.0 ? 1.0 / w2 : 0.0;
  return diag;
}

}  // namespace amppi
