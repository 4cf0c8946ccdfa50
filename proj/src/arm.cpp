#include "selfmap/arm.hpp"

#include <cmath>

namespace selfmap {

EndEffectorConfig forward_kinematics(const ProprioState& p,
                                     const ArmGeometry& geom) {
  double theta = 0.0;
  Vec2 pos = geom.base;
  for (int k = 0; k < 3; ++k) {
    theta += p.angles[k];
    pos.x() += geom.segment_length * std::cos(theta);
    pos.y() += geom.segment_length * std::sin(theta);
  }
  return {pos};
}

Mat23 analytic_jacobian(const ProprioState& p, const ArmGeometry& geom) {
  double theta[3];
  theta[0] = p.angles[0];
  theta[1] = theta[0] + p.angles[1];
  theta[2] = theta[1] + p.angles[2];

  // Joint k moves every segment from k outward.
  Mat23 J = Mat23::Zero();
  for (int k = 0; k < 3; ++k) {
    for (int j = k; j < 3; ++j) {
      J(0, k) += -geom.segment_length * std::sin(theta[j]);
      J(1, k) += geom.segment_length * std::cos(theta[j]);
    }
  }
  return J;
}

bool in_workspace(const ProprioState& p, const ArmGeometry& geom,
                  const WorkspaceLimits& limits) {
  for (int k = 0; k < 3; ++k) {
    double a = p.angles[k];
    if (!std::isfinite(a) || a < limits.angle_min || a > limits.angle_max)
      return false;
  }
  return forward_kinematics(p, geom).position.y() >= limits.min_tip_y;
}

double wrap_angle(double a) {
  double w = std::fmod(a + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  return w - kPi;
}

}  // namespace selfmap
