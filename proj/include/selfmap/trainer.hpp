#pragma once

#include <functional>
#include <vector>

#include "selfmap/dataset.hpp"
#include "selfmap/mlp.hpp"
#include "selfmap/rprop.hpp"

namespace selfmap {

// Two readings of the pairwise cost gradient:
//   Exact — the analytic derivative of the cost as written (centering term
//           outside the neighborhood gate, per-sample 2*gamma*xi).
//   Gated — the neighborhood gate multiplies the centering term too, and the
//           centering contribution is symmetrized as gamma*(xi_i + xi_j) in
//           both samples' deltas; inactive pairs contribute nothing at all.
// Exact is the default; Gated is kept selectable for comparison.
enum class GradientFormula { Exact, Gated };

struct TrainConfig {
  double mu = 0.1;
  double gamma = 1e-3;
  int max_iterations = 1500;
  double q_min = 1e-10;
  int n_environments = 1;
  RpropSettings rprop;
  GradientFormula gradient = GradientFormula::Exact;
  int threads = 1;
};

// Pair structure cached once per dataset: the gate depends only on the
// normalized exteroceptive distances, which are constant during training.
struct TrainingSet {
  struct ActivePair {
    int i, j;
    double s_dist;
  };
  const Dataset* dataset = nullptr;
  std::vector<ActivePair> active_pairs;
  std::size_t total_pairs = 0;

  double active_fraction() const {
    return total_pairs == 0
               ? 0.0
               : static_cast<double>(active_pairs.size()) /
                     static_cast<double>(total_pairs);
  }
};

TrainingSet prepare_training_set(const Dataset& dataset, double mu);

// Cost of one pair: gate(s_dist) * (dist(xi) - dist(s))^2 plus the centering
// term gamma * (|xi_i|^2 + |xi_j|^2).
double pair_cost(const VecX& xi_i, const VecX& xi_j, const VecX& s_norm_i,
                 const VecX& s_norm_j, double mu, double gamma);

struct PairGradient {
  Gradients grads;
  double q = 0.0;
  int active_pair_count = 0;
};

// Gradient of one pair's cost w.r.t. every weight. When the internal points
// coincide but the exteroceptive ones do not, the stress term is not
// differentiable; its contribution is dropped for that pair.
PairGradient pair_gradient(const ForwardTrace& trace_i,
                           const ForwardTrace& trace_j, double s_dist,
                           const NetworkParams& params, double mu, double gamma,
                           GradientFormula formula = GradientFormula::Exact);

struct BatchGradient {
  Gradients grads;
  double q = 0.0;
  double active_fraction = 0.0;
};

// Full-batch cost and gradient: one forward pass per sample, pairwise
// output-space accumulation over the active pairs, one backward pass per
// sample. Partitioned across cfg.threads workers with a reduction in worker
// order; the single-threaded result is the reference.
BatchGradient batch_cost_gradient(const NetworkParams& params,
                                  const TrainingSet& tset,
                                  const TrainConfig& cfg);

struct EpochResult {
  double q = 0.0;
  double active_fraction = 0.0;
};

// One full-batch RPROP step; returns the cost at the incoming weights.
EpochResult train_epoch(NetworkParams& params, const TrainingSet& tset,
                        const TrainConfig& cfg, RpropState& state);

struct TrainLogEntry {
  int iteration = 0;  // global, 1-based
  int phase = 0;      // 1-based environment phase
  double q = 0.0;
  double active_fraction = 0.0;
};
using TrainLogger = std::function<void(const TrainLogEntry&)>;

struct TrainResult {
  NetworkParams params;
  double q_initial = 0.0;  // cost at the first iteration
  double q_final = 0.0;    // cost of the returned weights, final dataset
  int iterations_run = 0;
};

// Splits the iteration budget into n_environments contiguous phases and asks
// the provider for each phase's dataset (phase index 0-based). Stops early
// once Q <= q_min, checked before every update.
TrainResult train(NetworkParams params,
                  const std::function<Dataset(int)>& dataset_for_phase,
                  const TrainConfig& cfg, const TrainLogger& log = nullptr);

}  // namespace selfmap
