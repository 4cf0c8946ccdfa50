#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "selfmap/dataset.hpp"
#include "selfmap/isomap.hpp"
#include "selfmap/rng.hpp"

using namespace selfmap;

namespace {

// Reference all-pairs shortest paths, cubic but obviously correct.
MatX floyd_warshall(const GeodesicGraph& graph) {
  const int n = graph.n_nodes;
  const double inf = std::numeric_limits<double>::infinity();
  MatX d = MatX::Constant(n, n, inf);
  for (int i = 0; i < n; ++i) d(i, i) = 0.0;
  for (int i = 0; i < n; ++i)
    for (const auto& [j, w] : graph.adjacency[i]) {
      d(i, j) = std::min(d(i, j), w);
      d(j, i) = std::min(d(j, i), w);
    }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
  return d;
}

MatX pairwise_distances(const MatX& points) {
  const int n = static_cast<int>(points.rows());
  MatX d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      d(i, j) = (points.row(i) - points.row(j)).norm();
  return d;
}

// Best orthogonal alignment of y onto x (reflections allowed), both centered.
double procrustes_residual(const MatX& x, const MatX& y) {
  const MatX xc = x.rowwise() - x.colwise().mean();
  const MatX yc = y.rowwise() - y.colwise().mean();
  Eigen::JacobiSVD<MatX> svd(yc.transpose() * xc,
                             Eigen::ComputeFullU | Eigen::ComputeFullV);
  const MatX r = svd.matrixU() * svd.matrixV().transpose();
  return (yc * r - xc).norm();
}

}  // namespace

TEST_CASE("nearest-neighbor chain recovers path distances") {
  MatX points(5, 1);
  points << 0.0, 1.0, 2.1, 3.3, 4.6;
  const GeodesicGraph graph = build_graph(points, 1);
  CHECK(graph.n_nodes == 5);
  CHECK(graph.k_used == 1);
  const MatX d = geodesic_distances(graph);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d(0, 2) == doctest::Approx(2.1).epsilon(1e-12));
  CHECK(d(0, 4) == doctest::Approx(4.6).epsilon(1e-12));
  CHECK(d(1, 4) == doctest::Approx(3.6).epsilon(1e-12));
  CHECK((d - d.transpose()).norm() == 0.0);
}

TEST_CASE("geodesics on a ring follow the ring, not the chords") {
  const int n = 8;
  MatX points(n, 2);
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * kPi * i / n;
    points(i, 0) = std::cos(a);
    points(i, 1) = std::sin(a);
  }
  const GeodesicGraph graph = build_graph(points, 2);
  const MatX d = geodesic_distances(graph);
  const double chord = 2.0 * std::sin(kPi / n);
  CHECK(d(0, 2) == doctest::Approx(2.0 * chord).epsilon(1e-12));
  CHECK(d(0, 4) == doctest::Approx(4.0 * chord).epsilon(1e-12));
  CHECK(d(3, 7) == doctest::Approx(4.0 * chord).epsilon(1e-12));
}

TEST_CASE("a disconnected neighborhood graph widens until it connects") {
  MatX points(10, 2);
  Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    points(i, 0) = rng.uniform(-0.5, 0.5);
    points(i, 1) = rng.uniform(-0.5, 0.5);
    points(i + 5, 0) = 10.0 + rng.uniform(-0.5, 0.5);
    points(i + 5, 1) = rng.uniform(-0.5, 0.5);
  }
  const GeodesicGraph graph = build_graph(points, 2);
  CHECK(graph.k_used > 2);
  const MatX d = geodesic_distances(graph);
  CHECK(d.allFinite());
  CHECK(d(0, 7) > 9.0);  // must cross the gap
}

TEST_CASE("degenerate point sets are rejected") {
  MatX identical = MatX::Ones(4, 2);
  CHECK_THROWS_AS(build_graph(identical, 1), std::runtime_error);

  MatX two = MatX::Zero(2, 1);
  two(1, 0) = 1.0;
  CHECK_THROWS_AS(build_graph(two, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_graph(two, 2), std::invalid_argument);

  MatX one = MatX::Zero(1, 2);
  CHECK_THROWS_AS(build_graph(one, 1), std::invalid_argument);
}

TEST_CASE("shortest paths agree with a reference solver") {
  const int n = 60;
  MatX points(n, 2);
  Rng rng(5);
  for (int i = 0; i < n; ++i) {
    points(i, 0) = rng.uniform();
    points(i, 1) = rng.uniform();
  }
  const GeodesicGraph graph = build_graph(points, 6);
  const MatX fast = geodesic_distances(graph);
  const MatX slow = floyd_warshall(graph);
  CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("the embedding reproduces Euclidean distances up to its scale") {
  MatX square(4, 2);
  square << 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0;
  const MatX d = pairwise_distances(square);
  const EmbeddingTargets emb = classical_mds(d, 2);
  CHECK(emb.targets.cwiseAbs().maxCoeff() == doctest::Approx(0.4).epsilon(1e-12));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double de =
          (emb.targets.row(i) - emb.targets.row(j)).norm() / emb.scale_applied;
      CHECK(de == doctest::Approx(d(i, j)).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("the embedding of planar points matches them up to rotation") {
  const int n = 30;
  MatX points(n, 2);
  Rng rng(7);
  for (int i = 0; i < n; ++i) {
    points(i, 0) = rng.uniform(-2.0, 2.0);
    points(i, 1) = rng.uniform(-1.0, 1.0);
  }
  const EmbeddingTargets emb = classical_mds(pairwise_distances(points), 2);
  const MatX recovered = emb.targets / emb.scale_applied;
  CHECK(procrustes_residual(points, recovered) < 1e-8);
}

TEST_CASE("collinear points collapse onto one embedding axis") {
  MatX points(6, 2);
  for (int i = 0; i < 6; ++i) {
    points(i, 0) = 0.3 * i;
    points(i, 1) = 0.0;
  }
  const EmbeddingTargets emb = classical_mds(pairwise_distances(points), 2);
  // All variance lives in the first coordinate. The second eigenvalue of the
  // centered Gram matrix is zero up to machine noise, so its axis carries
  // sqrt(eps)-scale components: allow 1e-7 relative.
  CHECK(emb.targets.col(1).cwiseAbs().maxCoeff() <
        1e-7 * emb.targets.col(0).cwiseAbs().maxCoeff());
}

TEST_CASE("a curved strip unfolds to a nearly distance-faithful plane") {
  // Points on a cylindrical band: an intrinsically flat surface that needs
  // the geodesic step to unfold.
  const int nu = 30, nv = 10;
  MatX points(nu * nv, 3);
  for (int iu = 0; iu < nu; ++iu)
    for (int iv = 0; iv < nv; ++iv) {
      const double u = 1.5 * kPi * iu / (nu - 1);
      const double v = 1.0 * iv / (nv - 1);
      const int row = iu * nv + iv;
      points(row, 0) = std::cos(u);
      points(row, 1) = std::sin(u);
      points(row, 2) = v;
    }
  const GeodesicGraph graph = build_graph(points, 8);
  const MatX dg = geodesic_distances(graph);
  const EmbeddingTargets emb = classical_mds(dg, 2);

  // Residual variance: 1 - r^2 between geodesic and embedded distances.
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  int m = 0;
  const int n = static_cast<int>(dg.rows());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double x = dg(i, j);
      const double y =
          (emb.targets.row(i) - emb.targets.row(j)).norm() / emb.scale_applied;
      sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
      ++m;
    }
  const double cov = sxy / m - (sx / m) * (sy / m);
  const double vx = sxx / m - (sx / m) * (sx / m);
  const double vy = syy / m - (sy / m) * (sy / m);
  const double residual = 1.0 - cov * cov / (vx * vy);
  CHECK(residual < 0.05);
  CHECK(residual >= 0.0);
}

TEST_CASE("supervised pretraining reduces the fit error deterministically") {
  ExplorationConfig cfg;
  cfg.n_samples = 60;
  cfg.seed = 12;
  PositionSensor sensor;
  const Dataset ds = explore(cfg, sensor, ArmGeometry{}, WorkspaceLimits{});

  MatX s_points(ds.size(), ds.s_dim());
  for (int i = 0; i < ds.size(); ++i) s_points.row(i) = ds.samples[i].s_norm;
  const GeodesicGraph graph = build_graph(s_points, 10);
  const EmbeddingTargets targets =
      classical_mds(geodesic_distances(graph), 2);

  const NetworkParams init = init_weights(3, 30, 2, 43);
  const PretrainResult a = pretrain(init, ds, targets, 80, RpropSettings{});
  const PretrainResult b = pretrain(init, ds, targets, 80, RpropSettings{});

  double manual_initial = 0.0;
  for (int i = 0; i < ds.size(); ++i)
    manual_initial +=
        (evaluate(init, ds.samples[i].p_norm) - targets.targets.row(i).transpose())
            .squaredNorm();
  CHECK(a.initial_error == doctest::Approx(manual_initial).epsilon(1e-12));
  CHECK(a.final_error < a.initial_error);

  double manual_final = 0.0;
  for (int i = 0; i < ds.size(); ++i)
    manual_final += (evaluate(a.params, ds.samples[i].p_norm) -
                     targets.targets.row(i).transpose())
                        .squaredNorm();
  CHECK(a.final_error == doctest::Approx(manual_final).epsilon(1e-10));

  CHECK(a.params.w_hidden == b.params.w_hidden);
  CHECK(a.params.w_output == b.params.w_output);
}
