#include "selfmap/reach.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "selfmap/io.hpp"
#include "selfmap/rng.hpp"

namespace selfmap {

namespace {

constexpr double kStallNorm = 1e-12;

int auto_max_iters(double initial_residual, double step) {
  return static_cast<int>(std::ceil(10.0 * initial_residual / step));
}

void check_task(const ReachTask& task, int expected_target_dim) {
  if (!(task.step > 0.0) || !(task.tol > 0.0))
    throw std::invalid_argument("step and tolerance must be positive");
  if (expected_target_dim > 0 && task.target.size() != expected_target_dim)
    throw std::invalid_argument("target dimension mismatch");
}

}  // namespace

Trajectory reach_f(const NetworkParams& params, const NormalizationStats& stats,
                   const ReachTask& task, const ArmGeometry& geom,
                   double fd_eps) {
  check_task(task, params.n_out());
  Trajectory traj;
  VecX p_norm = stats.normalize_p(task.start.angles);
  VecX xi = evaluate(params, p_norm);
  int max_iters = task.max_iters > 0
                      ? task.max_iters
                      : auto_max_iters((task.target - xi).norm(), task.step);

  for (int t = 0;; ++t) {
    TrajectoryStep rec;
    rec.t = t;
    rec.p.angles = stats.denormalize_p(p_norm);
    rec.xi = xi;
    rec.ee = forward_kinematics(rec.p, geom).position;
    traj.steps.push_back(rec);
    traj.iterations = t;

    const VecX resid = task.target - xi;
    if (resid.norm() <= task.tol) {
      traj.converged = true;
      break;
    }
    if (t >= max_iters) break;

    const MatX J = network_jacobian(params, p_norm, fd_eps);
    VecX dp = pseudoinverse(J) * resid;
    const double norm = dp.norm();
    if (norm < kStallNorm) {
      traj.stalled = true;
      break;
    }
    p_norm += task.step * dp / norm;
    xi = evaluate(params, p_norm);
  }
  return traj;
}

Trajectory reach_g(const ReachTask& task, const ArmGeometry& geom) {
  check_task(task, 2);
  Trajectory traj;
  ProprioState p = task.start;
  Vec2 c = forward_kinematics(p, geom).position;
  const Vec2 target(task.target[0], task.target[1]);
  int max_iters = task.max_iters > 0
                      ? task.max_iters
                      : auto_max_iters((target - c).norm(), task.step);

  for (int t = 0;; ++t) {
    TrajectoryStep rec;
    rec.t = t;
    rec.p = p;
    rec.ee = c;
    traj.steps.push_back(rec);
    traj.iterations = t;

    const Vec2 resid = target - c;
    if (resid.norm() <= task.tol) {
      traj.converged = true;
      break;
    }
    if (t >= max_iters) break;

    VecX dp = pseudoinverse(analytic_jacobian(p, geom)) * resid;
    const double norm = dp.norm();
    if (norm < kStallNorm) {
      traj.stalled = true;
      break;
    }
    p.angles += task.step * dp / norm;
    c = forward_kinematics(p, geom).position;
  }
  return traj;
}

void annotate_internal_state(Trajectory& traj, const NetworkParams& params,
                             const NormalizationStats& stats) {
  for (TrajectoryStep& rec : traj.steps)
    rec.xi = evaluate(params, stats.normalize_p(rec.p.angles));
}

ConsistentTarget make_consistent_targets(
    const NetworkParams& params, const NormalizationStats& stats,
    const Vec2& c_star, const ExplorationConfig& box, const ArmGeometry& geom,
    const WorkspaceLimits& limits, std::uint64_t seed, int max_retries) {
  Rng rng(seed);
  const IkOptions ik = exploration_ik_options(box, geom, limits);

  for (int retry = 0; retry < max_retries; ++retry) {
    ProprioState start;
    bool found_start = false;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      for (int k = 0; k < 3; ++k)
        start.angles[k] =
            box.reference.angles[k] + box.amplitude * rng.uniform_symmetric();
      if (in_workspace(start, geom, limits)) {
        found_start = true;
        break;
      }
    }
    if (!found_start) continue;

    const IkResult sol = solve_arm_ik(c_star, start, geom, ik);
    if (sol.converged && in_workspace(sol.p, geom, limits))
      return {sol.p, evaluate(params, stats.normalize_p(sol.p.angles))};
  }
  throw std::runtime_error(
      "no workspace-legal configuration reaches the requested end-effector "
      "target");
}

double max_deviation_from_segment(const std::vector<VecX>& points,
                                  const VecX& a, const VecX& b) {
  const VecX ab = b - a;
  const double len_sq = ab.squaredNorm();
  double worst = 0.0;
  for (const VecX& x : points) {
    double dist;
    if (len_sq <= 0.0) {
      dist = (x - a).norm();
    } else {
      const double s =
          std::clamp((x - a).dot(ab) / len_sq, 0.0, 1.0);
      dist = (x - (a + s * ab)).norm();
    }
    worst = std::max(worst, dist);
  }
  return worst;
}

double monotone_progress_fraction(const std::vector<VecX>& points,
                                  const VecX& target) {
  if (points.size() < 2) return 1.0;
  int good = 0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double before = (points[i] - target).norm();
    const double after = (points[i + 1] - target).norm();
    if (after <= before + 1e-15) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(points.size() - 1);
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  if (traj.steps.empty())
    throw std::invalid_argument("cannot write an empty trajectory");
  const int n_xi = static_cast<int>(traj.steps[0].xi.size());

  std::ostringstream out;
  out << "t,m1,m2,m3";
  for (int k = 1; k <= n_xi; ++k) out << ",xi_" << k;
  out << ",ee_x,ee_y\n";
  for (const TrajectoryStep& rec : traj.steps) {
    if (static_cast<int>(rec.xi.size()) != n_xi)
      throw std::invalid_argument("inconsistent internal-state dimensions");
    out << rec.t;
    for (int k = 0; k < 3; ++k) out << ',' << format_double(rec.p.angles[k]);
    for (int k = 0; k < n_xi; ++k) out << ',' << format_double(rec.xi[k]);
    out << ',' << format_double(rec.ee.x()) << ','
        << format_double(rec.ee.y()) << '\n';
  }
  write_text_file(path, out.str());
}

}  // namespace selfmap
