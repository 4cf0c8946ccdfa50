#include "selfmap/isomap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "selfmap/io.hpp"

namespace selfmap {

namespace {

bool is_connected(const GeodesicGraph& g) {
  if (g.n_nodes == 0) return false;
  std::vector<char> seen(static_cast<std::size_t>(g.n_nodes), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (const auto& [v, w] : g.adjacency[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == g.n_nodes;
}

GeodesicGraph knn_graph(const MatX& points, int k) {
  const int n = static_cast<int>(points.rows());
  GeodesicGraph g;
  g.n_nodes = n;
  g.k_used = k;
  g.adjacency.assign(static_cast<std::size_t>(n), {});

  std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      dist[static_cast<std::size_t>(j)] = {
          (points.row(i) - points.row(j)).norm(), j};
    dist[static_cast<std::size_t>(i)].first =
        std::numeric_limits<double>::infinity();  // never its own neighbor
    const auto mid = dist.begin() + k;
    std::nth_element(dist.begin(), mid - 1, dist.end());
    for (auto it = dist.begin(); it != mid; ++it) {
      if (!std::isfinite(it->first)) continue;
      g.adjacency[static_cast<std::size_t>(i)].emplace_back(it->second,
                                                            it->first);
    }
  }

  // Symmetrize: keep the union of directed kNN edges.
  std::vector<std::vector<std::pair<int, double>>> sym(
      static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (const auto& [j, w] : g.adjacency[static_cast<std::size_t>(i)]) {
      sym[static_cast<std::size_t>(i)].emplace_back(j, w);
      sym[static_cast<std::size_t>(j)].emplace_back(i, w);
    }
  }
  for (auto& nbrs : sym) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  g.adjacency = std::move(sym);
  return g;
}

}  // namespace

GeodesicGraph build_graph(const MatX& points, int k) {
  const int n = static_cast<int>(points.rows());
  if (n < 2) throw std::invalid_argument("graph needs at least 2 points");
  if (k < 1 || k >= n)
    throw std::invalid_argument("neighbor count k must be in [1, n-1]");

  bool all_identical = true;
  for (int i = 1; i < n && all_identical; ++i)
    all_identical = (points.row(i) - points.row(0)).norm() == 0.0;
  if (all_identical)
    throw std::runtime_error("all points identical: no usable neighborhoods");

  for (int kk = k;; kk = std::min(2 * kk, n - 1)) {
    GeodesicGraph g = knn_graph(points, kk);
    if (is_connected(g)) return g;
    if (kk == n - 1)
      throw std::runtime_error("graph disconnected even at k = n-1");
  }
}

MatX geodesic_distances(const GeodesicGraph& graph) {
  const int n = graph.n_nodes;
  const double inf = std::numeric_limits<double>::infinity();
  MatX D = MatX::Constant(n, n, inf);

  using Item = std::pair<double, int>;  // (distance, node), min-heap
  for (int src = 0; src < n; ++src) {
    auto row = D.row(src);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    row[src] = 0.0;
    heap.emplace(0.0, src);
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > row[u]) continue;  // stale entry
      for (const auto& [v, w] : graph.adjacency[static_cast<std::size_t>(u)]) {
        const double nd = d + w;
        if (nd < row[v]) {
          row[v] = nd;
          heap.emplace(nd, v);
        }
      }
    }
  }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!std::isfinite(D(i, j)))
        throw std::runtime_error("geodesic distances infinite: disconnected");
  return D;
}

EmbeddingTargets classical_mds(const MatX& D, int dim) {
  const int n = static_cast<int>(D.rows());
  if (D.cols() != n) throw std::invalid_argument("distance matrix not square");
  if (dim < 1 || dim > n) throw std::invalid_argument("bad embedding dim");

  // B = -1/2 J D.^2 J with J the centering projector.
  MatX D2 = D.cwiseProduct(D);
  VecX row_mean = D2.rowwise().mean();
  const double total_mean = row_mean.mean();
  MatX B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      B(i, j) = -0.5 * (D2(i, j) - row_mean[i] - row_mean[j] + total_mean);

  Eigen::SelfAdjointEigenSolver<MatX> eig(B);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  // Eigen returns ascending order; take the top `dim` from the back.
  const VecX& vals = eig.eigenvalues();
  const double lead = std::max(vals[n - 1], 0.0);
  const double neg_tol = 1e-9 * std::max(lead, 1.0);

  MatX embedding = MatX::Zero(n, dim);
  for (int d = 0; d < dim; ++d) {
    double lambda = vals[n - 1 - d];
    if (lambda < -neg_tol)
      throw std::runtime_error(
          "distance matrix lacks enough non-negative spectrum for the "
          "requested dimension");
    lambda = std::max(lambda, 0.0);  // zero eigenvalue -> degenerate axis
    embedding.col(d) = eig.eigenvectors().col(n - 1 - d) * std::sqrt(lambda);
  }

  const double max_abs = embedding.cwiseAbs().maxCoeff();
  if (max_abs <= 0.0)
    throw std::runtime_error("degenerate embedding: all coordinates zero");
  EmbeddingTargets out;
  out.scale_applied = kOutputSpan / max_abs;
  out.targets = embedding * out.scale_applied;
  return out;
}

PretrainResult pretrain(NetworkParams params, const Dataset& dataset,
                        const EmbeddingTargets& targets, int iterations,
                        const RpropSettings& settings) {
  const int n = dataset.size();
  if (targets.targets.rows() != n)
    throw std::invalid_argument("target rows must match dataset size");
  if (targets.targets.cols() != params.n_out())
    throw std::invalid_argument("target columns must match network outputs");

  RpropState state(params, settings);
  PretrainResult result;
  // RPROP is not monotone step to step; returning the best iterate makes the
  // improvement guarantee unconditional.
  NetworkParams best = params;
  double best_error = std::numeric_limits<double>::infinity();

  for (int it = 0; it < iterations; ++it) {
    Gradients grads(params);
    double error = 0.0;
    for (int i = 0; i < n; ++i) {
      const ForwardTrace trace =
          forward(params, dataset.samples[static_cast<std::size_t>(i)].p_norm);
      const VecX residual =
          trace.output_act - targets.targets.row(i).transpose();
      error += residual.squaredNorm();
      accumulate_sample_gradient(params, trace, 2.0 * residual, grads);
    }
    if (it == 0) result.initial_error = error;
    if (error < best_error) {
      best_error = error;
      best = params;
    }
    state.apply(params, grads);
  }

  double final_error = 0.0;
  for (int i = 0; i < n; ++i) {
    const VecX xi =
        evaluate(params, dataset.samples[static_cast<std::size_t>(i)].p_norm);
    final_error += (xi - targets.targets.row(i).transpose()).squaredNorm();
  }
  if (iterations == 0) result.initial_error = final_error;
  if (final_error < best_error) {
    best_error = final_error;
    best = std::move(params);
  }
  result.final_error = best_error;
  result.params = std::move(best);
  return result;
}

void write_targets_csv(const EmbeddingTargets& targets,
                       const std::string& path) {
  std::ostringstream out;
  for (int c = 0; c < targets.targets.cols(); ++c)
    out << (c ? "," : "") << "xi_" << (c + 1);
  out << "\n";
  for (int r = 0; r < targets.targets.rows(); ++r) {
    for (int c = 0; c < targets.targets.cols(); ++c)
      out << (c ? "," : "") << format_double(targets.targets(r, c));
    out << "\n";
  }
  write_text_file(path, out.str());
}

}  // namespace selfmap
