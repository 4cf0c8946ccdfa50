#pragma once

#include <functional>
#include <string>
#include <vector>

#include "selfmap/arm.hpp"
#include "selfmap/common.hpp"
#include "selfmap/dataset.hpp"
#include "selfmap/mlp.hpp"

namespace selfmap {

inline constexpr double kFdEpsilon = 1e-3;
inline constexpr double kPinvRelTol = 1e-8;

// Forward-difference Jacobian: column k = (f(x + eps*e_k) - f(x)) / eps.
MatX estimate_jacobian(const std::function<VecX(const VecX&)>& f, const VecX& x,
                       double eps = kFdEpsilon);

// Jacobian of the network output with respect to its normalized input.
MatX network_jacobian(const NetworkParams& params, const VecX& p_norm,
                      double eps = kFdEpsilon);

// SVD-based Moore-Penrose pseudoinverse; singular values at or below
// rel_tol * sigma_max are treated as zero.
MatX pseudoinverse(const MatX& m, double rel_tol = kPinvRelTol);

// Unit vector spanning the null space of a full-row-rank matrix with one more
// column than rows. Sign convention: the first component of magnitude above
// 1e-12 is made positive so results are reproducible. Throws when the matrix
// loses row rank (the null space is then more than a line).
VecX nullspace_line(const MatX& m, double rel_tol = kPinvRelTol);

// Angle in degrees between two lines through the origin, in [0, 90].
double line_angle_deg(const VecX& v1, const VecX& v2);

// Angle between the null-space lines of two matrices.
double nullspace_angle(const MatX& m1, const MatX& m2);

struct IkOptions {
  double tol = 1e-6;      // absolute end-effector tolerance
  double max_step = 0.2;  // per-iteration joint-step clamp, radians
  int max_iters = 500;
  // Optional joint box; iterates are projected into it, so solutions stay
  // inside the region the network was trained on.
  bool bounded = false;
  Vec3 lower = Vec3::Zero();
  Vec3 upper = Vec3::Zero();
};

struct IkResult {
  ProprioState p;
  bool converged = false;
  int iterations = 0;
};

// Damped resolved-rate descent: p += clamp(J_G^+ (target - tip)).
IkResult solve_arm_ik(const Vec2& target, const ProprioState& initial,
                      const ArmGeometry& geom, const IkOptions& opts = {});

// IK confined to the exploration box intersected with the joint limits,
// tolerance scaled to the segment length.
IkOptions exploration_ik_options(const ExplorationConfig& box,
                                 const ArmGeometry& geom,
                                 const WorkspaceLimits& limits);

struct TargetGrid {
  std::vector<Vec2> targets;  // row-major: y varies slowest
  std::vector<ProprioState> configs;
  std::vector<bool> feasible;  // IK converged and the pose is workspace-legal
  int n_side = 0;

  int n_feasible() const;
};

// Regular n_side x n_side grid of end-effector targets spanning the bounding
// box of the dataset's end-effector positions, shrunk by the given fraction,
// with a configuration per target found by descent from the reference pose.
TargetGrid make_target_grid(const Dataset& dataset, const ProprioState& reference,
                            const ArmGeometry& geom,
                            const WorkspaceLimits& limits, int n_side = 7,
                            double shrink = 0.1, const IkOptions& ik = {});

struct DivergencePoint {
  ProprioState p;
  double angle_deg = 0.0;
  bool singular = false;
};

struct DivergenceReport {
  std::vector<DivergencePoint> points;
  double mean_deg = 0.0;
  double std_deg = 0.0;
  int n_evaluated = 0;
  int n_singular = 0;
};

// Compares the null-space line of the network Jacobian (at the normalized
// point) against the analytic arm Jacobian rescaled into the same normalized
// input coordinates. Rank-deficient points are skipped and counted.
DivergenceReport evaluate_divergence(const NetworkParams& params,
                                     const NormalizationStats& stats,
                                     const std::vector<ProprioState>& grid,
                                     const ArmGeometry& geom,
                                     double eps = kFdEpsilon);

std::string divergence_to_json(const DivergenceReport& report);

}  // namespace selfmap
