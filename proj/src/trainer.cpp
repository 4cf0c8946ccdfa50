#include "selfmap/trainer.hpp"

#include <cmath>
#include <thread>

namespace selfmap {

namespace {

// Distances below this are treated as coincident internal points.
constexpr double kTinyDist = 1e-300;

// Per-sample gradient of the summed pair costs w.r.t. the network outputs,
// row i = dQ/dxi_i. The stress part runs over active pairs only; the exact
// centering part is per-sample because sample i appears in n-1 pairs.
MatX output_space_gradient(const TrainingSet& tset, const MatX& xi,
                           const TrainConfig& cfg, std::size_t pair_begin,
                           std::size_t pair_end, double* q_out) {
  const int n = static_cast<int>(xi.rows());
  MatX G = MatX::Zero(n, xi.cols());
  double q = 0.0;

  for (std::size_t idx = pair_begin; idx < pair_end; ++idx) {
    const auto& pr = tset.active_pairs[idx];
    const VecX diff = (xi.row(pr.i) - xi.row(pr.j)).transpose();
    const double d_xi = diff.norm();
    const double err = d_xi - pr.s_dist;
    q += err * err;
    if (d_xi > kTinyDist) {
      const double factor = 2.0 * (1.0 - pr.s_dist / d_xi);
      G.row(pr.i) += factor * diff.transpose();
      G.row(pr.j) -= factor * diff.transpose();
    }
    if (cfg.gradient == GradientFormula::Gated && cfg.gamma != 0.0) {
      const VecX sum = (xi.row(pr.i) + xi.row(pr.j)).transpose();
      G.row(pr.i) += 2.0 * cfg.gamma * sum.transpose();
      G.row(pr.j) += 2.0 * cfg.gamma * sum.transpose();
    }
  }

  *q_out = q;
  return G;
}

}  // namespace

TrainingSet prepare_training_set(const Dataset& dataset, double mu) {
  const int n = dataset.size();
  if (n < 2) throw std::invalid_argument("training needs at least 2 samples");

  TrainingSet tset;
  tset.dataset = &dataset;
  tset.total_pairs = pair_count(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d =
          (dataset.samples[static_cast<std::size_t>(i)].s_norm -
           dataset.samples[static_cast<std::size_t>(j)].s_norm)
              .norm();
      if (neighborhood_weight(d, mu) > 0.0)
        tset.active_pairs.push_back({i, j, d});
    }
  }
  return tset;
}

double pair_cost(const VecX& xi_i, const VecX& xi_j, const VecX& s_norm_i,
                 const VecX& s_norm_j, double mu, double gamma) {
  const double d_s = (s_norm_i - s_norm_j).norm();
  const double d_xi = (xi_i - xi_j).norm();
  const double err = d_xi - d_s;
  return neighborhood_weight(d_s, mu) * err * err +
         gamma * (xi_i.squaredNorm() + xi_j.squaredNorm());
}

PairGradient pair_gradient(const ForwardTrace& trace_i,
                           const ForwardTrace& trace_j, double s_dist,
                           const NetworkParams& params, double mu, double gamma,
                           GradientFormula formula) {
  PairGradient out{Gradients(params)};
  const VecX& xi_i = trace_i.output_act;
  const VecX& xi_j = trace_j.output_act;
  const bool active = neighborhood_weight(s_dist, mu) > 0.0;

  const VecX diff = xi_i - xi_j;
  const double d_xi = diff.norm();
  const double err = d_xi - s_dist;
  out.q = (active ? err * err : 0.0) +
          gamma * (xi_i.squaredNorm() + xi_j.squaredNorm());
  out.active_pair_count = active ? 1 : 0;

  VecX g_i = VecX::Zero(xi_i.size());
  VecX g_j = VecX::Zero(xi_j.size());
  if (active && d_xi > kTinyDist) {
    const double factor = 2.0 * (1.0 - s_dist / d_xi);
    g_i += factor * diff;
    g_j -= factor * diff;
  }
  if (formula == GradientFormula::Exact) {
    g_i += 2.0 * gamma * xi_i;
    g_j += 2.0 * gamma * xi_j;
  } else if (active) {
    const VecX sum = 2.0 * gamma * (xi_i + xi_j);
    g_i += sum;
    g_j += sum;
  }

  accumulate_sample_gradient(params, trace_i, g_i, out.grads);
  accumulate_sample_gradient(params, trace_j, g_j, out.grads);
  return out;
}

BatchGradient batch_cost_gradient(const NetworkParams& params,
                                  const TrainingSet& tset,
                                  const TrainConfig& cfg) {
  const Dataset& ds = *tset.dataset;
  const int n = ds.size();
  const int n_out = params.n_out();
  const int workers = std::max(1, cfg.threads);

  std::vector<ForwardTrace> traces(static_cast<std::size_t>(n));
  MatX xi(n, n_out);
  for (int i = 0; i < n; ++i) {
    traces[static_cast<std::size_t>(i)] =
        forward(params, ds.samples[static_cast<std::size_t>(i)].p_norm);
    xi.row(i) = traces[static_cast<std::size_t>(i)].output_act.transpose();
  }

  // Stress part of the output-space gradient, partitioned over active pairs.
  MatX G;
  double q = 0.0;
  if (workers == 1 || tset.active_pairs.size() < 2) {
    G = output_space_gradient(tset, xi, cfg, 0, tset.active_pairs.size(), &q);
  } else {
    const std::size_t n_pairs = tset.active_pairs.size();
    const std::size_t chunk = (n_pairs + workers - 1) / workers;
    std::vector<MatX> partial_G(static_cast<std::size_t>(workers));
    std::vector<double> partial_q(static_cast<std::size_t>(workers), 0.0);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n_pairs, w * chunk);
      const std::size_t end = std::min(n_pairs, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        partial_G[static_cast<std::size_t>(w)] = output_space_gradient(
            tset, xi, cfg, begin, end, &partial_q[static_cast<std::size_t>(w)]);
      });
    }
    for (auto& t : pool) t.join();
    G = MatX::Zero(n, n_out);
    for (int w = 0; w < workers; ++w) {  // fixed order keeps sums reproducible
      G += partial_G[static_cast<std::size_t>(w)];
      q += partial_q[static_cast<std::size_t>(w)];
    }
  }

  if (cfg.gamma != 0.0) {
    if (cfg.gradient == GradientFormula::Exact)
      G += 2.0 * cfg.gamma * static_cast<double>(n - 1) * xi;
    // Centering cost per the written form: gate-independent, counted once
    // per pair, i.e. n-1 times per sample.
    q += cfg.gamma * static_cast<double>(n - 1) * xi.squaredNorm();
  }

  BatchGradient out{Gradients(params)};
  out.q = q;
  out.active_fraction = tset.active_fraction();

  if (workers == 1 || n < 2 * workers) {
    for (int i = 0; i < n; ++i)
      accumulate_sample_gradient(params, traces[static_cast<std::size_t>(i)],
                                 G.row(i).transpose(), out.grads);
  } else {
    const int chunk = (n + workers - 1) / workers;
    std::vector<Gradients> partial(static_cast<std::size_t>(workers),
                                   Gradients(params));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      const int begin = std::min(n, w * chunk);
      const int end = std::min(n, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        for (int i = begin; i < end; ++i)
          accumulate_sample_gradient(params,
                                     traces[static_cast<std::size_t>(i)],
                                     G.row(i).transpose(),
                                     partial[static_cast<std::size_t>(w)]);
      });
    }
    for (auto& t : pool) t.join();
    for (int w = 0; w < workers; ++w) {
      out.grads.d_hidden += partial[static_cast<std::size_t>(w)].d_hidden;
      out.grads.d_output += partial[static_cast<std::size_t>(w)].d_output;
    }
  }
  return out;
}

EpochResult train_epoch(NetworkParams& params, const TrainingSet& tset,
                        const TrainConfig& cfg, RpropState& state) {
  const BatchGradient bg = batch_cost_gradient(params, tset, cfg);
  state.apply(params, bg.grads);
  return {bg.q, bg.active_fraction};
}

TrainResult train(NetworkParams params,
                  const std::function<Dataset(int)>& dataset_for_phase,
                  const TrainConfig& cfg, const TrainLogger& log) {
  if (cfg.max_iterations < 1 || cfg.n_environments < 1)
    throw std::invalid_argument("training budget invalid");

  TrainResult result;
  const int phases = cfg.n_environments;
  const int per_phase = cfg.max_iterations / phases;

  int iteration = 0;
  bool stopped = false;
  Dataset dataset;
  TrainingSet tset;
  for (int phase = 0; phase < phases && !stopped; ++phase) {
    dataset = dataset_for_phase(phase);
    tset = prepare_training_set(dataset, cfg.mu);
    // The objective changed with the dataset; stale sign history would
    // mislead the step adaptation.
    RpropState state(params, cfg.rprop);

    int budget = per_phase;
    if (phase == phases - 1) budget = cfg.max_iterations - per_phase * phase;
    for (int it = 0; it < budget; ++it) {
      const BatchGradient bg = batch_cost_gradient(params, tset, cfg);
      ++iteration;
      if (log) log({iteration, phase + 1, bg.q, bg.active_fraction});
      if (iteration == 1) result.q_initial = bg.q;
      if (bg.q <= cfg.q_min) {
        stopped = true;  // logged evaluation, but no update applied
        break;
      }
      state.apply(params, bg.grads);
      result.iterations_run = iteration;
    }
  }

  // Cost of the returned weights on the last phase's dataset.
  const BatchGradient final_bg = batch_cost_gradient(params, tset, cfg);
  result.q_final = final_bg.q;
  result.params = std::move(params);
  return result;
}

}  // namespace selfmap
