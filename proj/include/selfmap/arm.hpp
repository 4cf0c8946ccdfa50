#pragma once

#include "selfmap/common.hpp"

namespace selfmap {

// Joint angles m1, m2, m3 in radians, each segment measured relative to the
// previous one.
struct ProprioState {
  Vec3 angles = Vec3::Zero();
};

struct EndEffectorConfig {
  Vec2 position = Vec2::Zero();
};

// Three segments of equal length mounted at base_position; the first segment
// angle is measured from the positive x axis.
struct ArmGeometry {
  double segment_length = 1.0;
  Vec2 base = Vec2::Zero();
};

// Legal configurations: joint range plus "tip stays above the mounting plane".
struct WorkspaceLimits {
  double angle_min = -kPi;
  double angle_max = kPi;
  double min_tip_y = 0.0;
};

EndEffectorConfig forward_kinematics(const ProprioState& p,
                                     const ArmGeometry& geom);

// d(tip)/d(m_k); column k sums the segment tangents from segment k outward.
Mat23 analytic_jacobian(const ProprioState& p, const ArmGeometry& geom);

bool in_workspace(const ProprioState& p, const ArmGeometry& geom,
                  const WorkspaceLimits& limits);

double wrap_angle(double a);

}  // namespace selfmap
