#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "selfmap/arm.hpp"
#include "selfmap/common.hpp"
#include "selfmap/dataset.hpp"
#include "selfmap/jacobian.hpp"
#include "selfmap/mlp.hpp"

namespace selfmap {

struct ReachTask {
  ProprioState start;
  VecX target;        // internal-state target, or end-effector target (size 2)
  double step = 1e-3;  // fixed per-iteration motion in the controlled space
  double tol = 1e-3;   // stop once the residual norm falls to this
  int max_iters = 0;   // 0 selects 10 * (initial residual / step)
};

struct TrajectoryStep {
  int t = 0;
  ProprioState p;  // raw joint angles
  VecX xi;         // network internal state (empty until annotated)
  Vec2 ee = Vec2::Zero();
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  bool converged = false;
  bool stalled = false;  // pseudoinverse update vanished before the tolerance
  int iterations = 0;
};

// Pseudoinverse servo on the learned map: each iteration takes a step of
// fixed norm along J^+ (target - xi) in normalized joint coordinates. The
// recorded end-effector positions come from the true kinematics but are
// never fed back into the loop.
Trajectory reach_f(const NetworkParams& params, const NormalizationStats& stats,
                   const ReachTask& task, const ArmGeometry& geom,
                   double fd_eps = kFdEpsilon);

// Same servo on the true kinematics: steps of fixed norm in raw joint
// coordinates, residual measured on the end-effector position.
Trajectory reach_g(const ReachTask& task, const ArmGeometry& geom);

// Fills each step's internal state from the network; used on ground-truth
// trajectories so both kinds export the same columns.
void annotate_internal_state(Trajectory& traj, const NetworkParams& params,
                             const NormalizationStats& stats);

struct ConsistentTarget {
  ProprioState p;  // a configuration whose end effector sits on the request
  VecX xi;         // the network's reading of that configuration
};

// Picks a random workspace-legal start in the exploration box and descends
// the true kinematics until the end effector matches c_star to
// 1e-6 * segment length, retrying from fresh starts as needed. The redundant
// joint direction is thereby randomized while the tip is pinned.
ConsistentTarget make_consistent_targets(
    const NetworkParams& params, const NormalizationStats& stats,
    const Vec2& c_star, const ExplorationConfig& box, const ArmGeometry& geom,
    const WorkspaceLimits& limits, std::uint64_t seed, int max_retries = 20);

// Largest distance from any point to the segment [a, b].
double max_deviation_from_segment(const std::vector<VecX>& points,
                                  const VecX& a, const VecX& b);

// Fraction of consecutive steps whose distance to the target does not grow.
double monotone_progress_fraction(const std::vector<VecX>& points,
                                  const VecX& target);

// Columns: t, m1, m2, m3, xi_1..xi_n, ee_x, ee_y (xi columns omitted when
// the trajectory was never annotated).
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace selfmap
