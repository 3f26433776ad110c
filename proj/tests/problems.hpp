#pragma once

#include <cmath>

#include "shapeopt/functionals.hpp"

namespace testsupport {

/// Smooth Gaussian bump 0.25 exp(-|x - (0.3, -0.2)|^2) as tracking data.
inline shapeopt::TargetField gaussian_target() {
  using shapeopt::Vec2;
  auto value = [](const Vec2& x) {
    const Vec2 d = x - Vec2(0.3, -0.2);
    return 0.25 * std::exp(-d.squaredNorm());
  };
  return shapeopt::TargetField::analytic(value, [value](const Vec2& x) {
    return Vec2(-2.0 * (x - Vec2(0.3, -0.2)) * value(x));
  });
}

inline shapeopt::ShapeProblem smooth_tracking(double nu = 0.0) {
  return shapeopt::ShapeProblem::poisson_tracking(5.0, 1.0, 1.0, gaussian_target(), nu);
}

}  // namespace testsupport
