#include "selfmap/jacobian.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace selfmap {

namespace {
constexpr double kSignEps = 1e-12;
}

MatX estimate_jacobian(const std::function<VecX(const VecX&)>& f, const VecX& x,
                       double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("step size must be positive");
  const VecX f0 = f(x);
  MatX J(f0.size(), x.size());
  for (int k = 0; k < x.size(); ++k) {
    VecX xk = x;
    xk[k] += eps;
    J.col(k) = (f(xk) - f0) / eps;
  }
  return J;
}

MatX network_jacobian(const NetworkParams& params, const VecX& p_norm,
                      double eps) {
  return estimate_jacobian(
      [&params](const VecX& x) { return evaluate(params, x); }, p_norm, eps);
}

MatX pseudoinverse(const MatX& m, double rel_tol) {
  Eigen::JacobiSVD<MatX> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VecX& sigma = svd.singularValues();
  const double cutoff = rel_tol * (sigma.size() > 0 ? sigma(0) : 0.0);
  VecX inv = VecX::Zero(sigma.size());
  for (int i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cutoff) inv(i) = 1.0 / sigma(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

VecX nullspace_line(const MatX& m, double rel_tol) {
  if (m.cols() != m.rows() + 1)
    throw std::invalid_argument("null-space line needs rows+1 columns");
  Eigen::JacobiSVD<MatX> svd(m, Eigen::ComputeFullV);
  const VecX& sigma = svd.singularValues();
  // With n = rows+1 columns the null space is a line exactly when all rows
  // are independent, i.e. the smallest computed singular value is nonzero.
  if (sigma(sigma.size() - 1) <= rel_tol * sigma(0))
    throw std::runtime_error(
        "matrix is rank-deficient; null-space direction is not unique");
  VecX v = svd.matrixV().col(m.cols() - 1);
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > kSignEps) {
      if (v(i) < 0.0) v = -v;
      break;
    }
  }
  return v;
}

double line_angle_deg(const VecX& v1, const VecX& v2) {
  const double n1 = v1.norm();
  const double n2 = v2.norm();
  if (n1 <= 0.0 || n2 <= 0.0)
    throw std::invalid_argument("line angle needs nonzero vectors");
  const double c = std::min(1.0, std::abs(v1.dot(v2)) / (n1 * n2));
  return std::acos(c) * 180.0 / kPi;
}

double nullspace_angle(const MatX& m1, const MatX& m2) {
  return line_angle_deg(nullspace_line(m1), nullspace_line(m2));
}

IkResult solve_arm_ik(const Vec2& target, const ProprioState& initial,
                      const ArmGeometry& geom, const IkOptions& opts) {
  IkResult result;
  result.p = initial;
  for (int it = 0; it < opts.max_iters; ++it) {
    const Vec2 resid =
        target - forward_kinematics(result.p, geom).position;
    if (resid.norm() <= opts.tol) {
      result.converged = true;
      result.iterations = it;
      return result;
    }
    VecX step = pseudoinverse(analytic_jacobian(result.p, geom)) * resid;
    const double norm = step.norm();
    if (norm < 1e-15) break;  // stuck at a singular pose
    if (norm > opts.max_step) step *= opts.max_step / norm;
    result.p.angles += step;
    if (opts.bounded)
      result.p.angles =
          result.p.angles.cwiseMax(opts.lower).cwiseMin(opts.upper);
  }
  result.iterations = opts.max_iters;
  return result;
}

IkOptions exploration_ik_options(const ExplorationConfig& box,
                                 const ArmGeometry& geom,
                                 const WorkspaceLimits& limits) {
  IkOptions ik;
  ik.tol = 1e-6 * geom.segment_length;
  ik.bounded = true;
  const Vec3 amp = Vec3::Constant(box.amplitude);
  ik.lower = (box.reference.angles - amp)
                 .cwiseMax(Vec3::Constant(limits.angle_min));
  ik.upper = (box.reference.angles + amp)
                 .cwiseMin(Vec3::Constant(limits.angle_max));
  return ik;
}

int TargetGrid::n_feasible() const {
  int n = 0;
  for (bool f : feasible)
    if (f) ++n;
  return n;
}

TargetGrid make_target_grid(const Dataset& dataset,
                            const ProprioState& reference,
                            const ArmGeometry& geom,
                            const WorkspaceLimits& limits, int n_side,
                            double shrink, const IkOptions& ik) {
  if (n_side < 2) throw std::invalid_argument("grid needs at least 2 per side");
  if (dataset.size() < 1) throw std::invalid_argument("grid needs samples");

  Vec2 lo = forward_kinematics(dataset.samples[0].p, geom).position;
  Vec2 hi = lo;
  for (const Sample& smp : dataset.samples) {
    const Vec2 ee = forward_kinematics(smp.p, geom).position;
    lo = lo.cwiseMin(ee);
    hi = hi.cwiseMax(ee);
  }
  const Vec2 center = 0.5 * (lo + hi);
  const Vec2 half = 0.5 * (hi - lo) * (1.0 - shrink);

  TargetGrid grid;
  grid.n_side = n_side;
  for (int iy = 0; iy < n_side; ++iy) {
    for (int ix = 0; ix < n_side; ++ix) {
      Vec2 t;
      t.x() = center.x() + half.x() * (2.0 * ix / (n_side - 1) - 1.0);
      t.y() = center.y() + half.y() * (2.0 * iy / (n_side - 1) - 1.0);
      const IkResult sol = solve_arm_ik(t, reference, geom, ik);
      grid.targets.push_back(t);
      grid.configs.push_back(sol.p);
      grid.feasible.push_back(sol.converged &&
                              in_workspace(sol.p, geom, limits));
    }
  }
  return grid;
}

DivergenceReport evaluate_divergence(const NetworkParams& params,
                                     const NormalizationStats& stats,
                                     const std::vector<ProprioState>& grid,
                                     const ArmGeometry& geom, double eps) {
  DivergenceReport report;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const ProprioState& p : grid) {
    DivergencePoint pt;
    pt.p = p;
    // The network consumes normalized input, so J_G (taken w.r.t. raw
    // angles) is rescaled by dp/dp_norm before comparing null spaces. The
    // scale is a scalar, so the angle itself is unaffected.
    const MatX j_f = network_jacobian(params, stats.normalize_p(p.angles), eps);
    const MatX j_g =
        analytic_jacobian(p, geom) * (stats.p_scale / kInputSpan);
    try {
      pt.angle_deg = nullspace_angle(j_f, j_g);
    } catch (const std::runtime_error&) {
      pt.singular = true;
    }
    if (pt.singular) {
      ++report.n_singular;
    } else {
      ++report.n_evaluated;
      sum += pt.angle_deg;
      sum_sq += pt.angle_deg * pt.angle_deg;
    }
    report.points.push_back(pt);
  }
  if (report.n_evaluated > 0) {
    report.mean_deg = sum / report.n_evaluated;
    const double var =
        std::max(0.0, sum_sq / report.n_evaluated -
                          report.mean_deg * report.mean_deg);
    report.std_deg = std::sqrt(var);
  }
  return report;
}

std::string divergence_to_json(const DivergenceReport& report) {
  nlohmann::json j;
  j["mean_deg"] = report.mean_deg;
  j["std_deg"] = report.std_deg;
  j["n_evaluated"] = report.n_evaluated;
  j["n_singular"] = report.n_singular;
  j["points"] = nlohmann::json::array();
  for (const DivergencePoint& pt : report.points) {
    nlohmann::json e;
    e["p"] = {pt.p.angles[0], pt.p.angles[1], pt.p.angles[2]};
    if (pt.singular)
      e["singular"] = true;
    else
      e["angle_deg"] = pt.angle_deg;
    j["points"].push_back(e);
  }
  return j.dump(2) + "\n";
}

}  // namespace selfmap
