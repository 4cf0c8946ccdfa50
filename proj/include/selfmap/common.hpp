#pragma once

#include <Eigen/Dense>
#include <numbers>
#include <stdexcept>

namespace selfmap {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Mat23 = Eigen::Matrix<double, 2, 3>;

inline constexpr double kPi = std::numbers::pi;

// Normalization spans from the training conventions: inputs fill [-0.8, 0.8],
// exteroceptive values and embedding targets fill [-0.4, 0.4].
inline constexpr double kInputSpan = 0.8;
inline constexpr double kOutputSpan = 0.4;

}  // namespace selfmap
