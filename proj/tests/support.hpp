#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "shapeopt/curve.hpp"

namespace testsupport {

using shapeopt::BoundaryScalarField;
using shapeopt::BoundaryVectorField;
using shapeopt::DiscreteCurve;
using shapeopt::PointArray;
using shapeopt::Vec2;

constexpr double kPi = std::numbers::pi;

/// Star-shaped curve r(theta) = 1 + sum_{k<=modes} (a_k cos + b_k sin), |a_k|, |b_k| <= 0.15 / k,
/// with a random offset and anisotropic stretch.
inline DiscreteCurve random_curve(std::mt19937_64& rng, int n, int modes = 8) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(modes + 1), b(modes + 1);
  for (int k = 1; k <= modes; ++k) {
    a[k] = 0.15 / k * u(rng);
    b[k] = 0.15 / k * u(rng);
  }
  const Vec2 center(0.3 * u(rng), 0.3 * u(rng));
  const double sx = 1.0 + 0.2 * u(rng), sy = 1.0 + 0.2 * u(rng);
  return DiscreteCurve::sample(n, [&](double t) {
    double r = 1.0;
    for (int k = 1; k <= modes; ++k) r += a[k] * std::cos(k * t) + b[k] * std::sin(k * t);
    return Vec2(center.x() + sx * r * std::cos(t), center.y() + sy * r * std::sin(t));
  });
}

inline Eigen::VectorXd random_band_limited(std::mt19937_64& rng, int n, int modes = 8) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd f = Eigen::VectorXd::Constant(n, u(rng));
  for (int k = 1; k <= modes; ++k) {
    const double a = u(rng), b = u(rng);
    for (int i = 0; i < n; ++i) {
      const double t = 2.0 * kPi * i / n;
      f[i] += a * std::cos(k * t) + b * std::sin(k * t);
    }
  }
  return f;
}

inline BoundaryScalarField random_scalar(std::mt19937_64& rng, int n, int modes = 8) {
  return BoundaryScalarField(random_band_limited(rng, n, modes));
}

inline BoundaryVectorField random_vector(std::mt19937_64& rng, int n, int modes = 8) {
  PointArray v(n, 2);
  v.col(0) = random_band_limited(rng, n, modes);
  v.col(1) = random_band_limited(rng, n, modes);
  return BoundaryVectorField(std::move(v));
}

inline Eigen::VectorXd theta_samples(int n, double (*f)(double)) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = f(2.0 * kPi * i / n);
  return v;
}

}  // namespace testsupport
