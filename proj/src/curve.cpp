#include "shapeopt/curve.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

constexpr double kPi = std::numbers::pi;

PointArray reversed_keep_first(const PointArray& p) {
  const int n = static_cast<int>(p.rows());
  PointArray out(n, 2);
  for (int i = 0; i < n; ++i) out.row(i) = p.row((n - i) % n);
  return out;
}

}  // namespace

double polygon_signed_area(const PointArray& points) {
  const int n = static_cast<int>(points.rows());
  double twice = 0.0;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    twice += points(i, 0) * points(j, 1) - points(j, 0) * points(i, 1);
  }
  return 0.5 * twice;
}

DiscreteCurve::DiscreteCurve(PointArray points) : points_(std::move(points)) {
  const int n = size();
  if (n < kMinSamples) {
    throw InvalidCurve("curve needs at least " + std::to_string(kMinSamples) + " samples, got " +
                       std::to_string(n));
  }
  if (!points_.allFinite()) throw InvalidCurve("curve has non-finite coordinates");
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    if ((points_.row(j) - points_.row(i)).norm() <= 0.0) {
      throw InvalidCurve("curve has a zero-length edge at sample " + std::to_string(i));
    }
  }
  const double area = polygon_signed_area(points_);
  if (area == 0.0) throw InvalidCurve("curve encloses zero signed area");
  if (area < 0.0) {
    points_ = reversed_keep_first(points_);
    reversed_ = true;
  }

  c_theta_ = periodic_derivative(points_);
  speed_ = c_theta_.rowwise().norm();
  if (speed_.minCoeff() <= 0.0) throw InvalidCurve("curve has a stationary parameter point");
  tangent_ = c_theta_.array().colwise() / speed_.array();
  normal_.resize(n, 2);
  normal_.col(0) = tangent_.col(1);
  normal_.col(1) = -tangent_.col(0);
}

DiscreteCurve DiscreteCurve::sample(int n, const std::function<Vec2(double)>& param) {
  if (n < kMinSamples) {
    throw InvalidCurve("curve needs at least " + std::to_string(kMinSamples) + " samples");
  }
  PointArray p(n, 2);
  for (int i = 0; i < n; ++i) p.row(i) = param(2.0 * kPi * i / n).transpose();
  return DiscreteCurve(std::move(p));
}

DiscreteCurve DiscreteCurve::circle(int n, double radius, const Vec2& center) {
  return ellipse(n, radius, radius, center);
}

DiscreteCurve DiscreteCurve::ellipse(int n, double semi_x, double semi_y, const Vec2& center) {
  return sample(n, [&](double t) {
    return Vec2(center.x() + semi_x * std::cos(t), center.y() + semi_y * std::sin(t));
  });
}

Eigen::VectorXd periodic_derivative(const Eigen::VectorXd& f) {
  const int n = static_cast<int>(f.size());
  Eigen::FFT<double> fft;
  std::vector<double> in(f.data(), f.data() + n);
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, in);
  for (int k = 0; k < n; ++k) {
    int wave = k <= n / 2 ? k : k - n;
    if (n % 2 == 0 && k == n / 2) wave = 0;
    spec[k] *= std::complex<double>(0.0, static_cast<double>(wave));
  }
  std::vector<double> out;
  fft.inv(out, spec);
  return Eigen::Map<Eigen::VectorXd>(out.data(), n);
}

Eigen::VectorXd periodic_antiderivative(const Eigen::VectorXd& f) {
  const int n = static_cast<int>(f.size());
  Eigen::FFT<double> fft;
  std::vector<double> in(f.data(), f.data() + n);
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, in);
  for (int k = 0; k < n; ++k) {
    int wave = k <= n / 2 ? k : k - n;
    if (n % 2 == 0 && k == n / 2) wave = 0;
    spec[k] = wave == 0 ? std::complex<double>(0.0, 0.0) : spec[k] / std::complex<double>(0.0, wave);
  }
  std::vector<double> out;
  fft.inv(out, spec);
  return Eigen::Map<Eigen::VectorXd>(out.data(), n);
}

PointArray periodic_derivative(const PointArray& f) {
  PointArray out(f.rows(), 2);
  out.col(0) = periodic_derivative(Eigen::VectorXd(f.col(0)));
  out.col(1) = periodic_derivative(Eigen::VectorXd(f.col(1)));
  return out;
}

const Eigen::MatrixXd& spectral_differentiation_matrix(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<Eigen::MatrixXd>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    auto d = std::make_unique<Eigen::MatrixXd>(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) {
          (*d)(i, j) = 0.0;
          continue;
        }
        const int k = i - j;
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        const double x = k * kPi / n;
        (*d)(i, j) = 0.5 * sign * (n % 2 == 0 ? 1.0 / std::tan(x) : 1.0 / std::sin(x));
      }
    }
    slot = std::move(d);
  }
  return *slot;
}

void require_bound(const BoundaryScalarField& f, const DiscreteCurve& c) {
  if (f.size() != c.size()) {
    throw InvalidArgument("scalar field of length " + std::to_string(f.size()) +
                          " is not bound to a curve with " + std::to_string(c.size()) + " nodes");
  }
}

void require_bound(const BoundaryVectorField& f, const DiscreteCurve& c) {
  if (f.size() != c.size()) {
    throw InvalidArgument("vector field of length " + std::to_string(f.size()) +
                          " is not bound to a curve with " + std::to_string(c.size()) + " nodes");
  }
}

BoundaryVectorField circumferential_derivative(const DiscreteCurve& c) {
  return BoundaryVectorField(c.c_theta());
}

ArcLengthMeasure arc_length_measure(const DiscreteCurve& c) {
  return {BoundaryScalarField(c.speed()), c.speed().sum() * c.parameter_step()};
}

double curve_length(const DiscreteCurve& c) { return c.speed().sum() * c.parameter_step(); }

BoundaryScalarField arc_length_derivative(const BoundaryScalarField& f, const DiscreteCurve& c) {
  require_bound(f, c);
  return BoundaryScalarField(periodic_derivative(f.values).cwiseQuotient(c.speed()));
}

BoundaryVectorField arc_length_derivative(const BoundaryVectorField& f, const DiscreteCurve& c) {
  require_bound(f, c);
  PointArray d = periodic_derivative(f.vectors);
  d.array().colwise() /= c.speed().array();
  return BoundaryVectorField(std::move(d));
}

Frame unit_tangent_normal(const DiscreteCurve& c) {
  return {BoundaryVectorField(c.tangent()), BoundaryVectorField(c.normal())};
}

BoundaryScalarField curvature(const DiscreteCurve& c) {
  const BoundaryVectorField dv = arc_length_derivative(BoundaryVectorField(c.tangent()), c);
  // D_s v = -kappa n for the exterior normal.
  return BoundaryScalarField(-(dv.vectors.cwiseProduct(c.normal())).rowwise().sum());
}

NormalDecomposition normal_decompose(const BoundaryVectorField& h, const DiscreteCurve& c) {
  require_bound(h, c);
  return {BoundaryScalarField(h.vectors.cwiseProduct(c.normal()).rowwise().sum()),
          BoundaryScalarField(h.vectors.cwiseProduct(c.tangent()).rowwise().sum())};
}

BoundaryVectorField normal_field(const BoundaryScalarField& alpha, const DiscreteCurve& c) {
  require_bound(alpha, c);
  PointArray v = c.normal();
  v.array().colwise() *= alpha.values.array();
  return BoundaryVectorField(std::move(v));
}

DiscreteCurve resample(const DiscreteCurve& c, int m) {
  if (m < DiscreteCurve::kMinSamples) {
    throw InvalidArgument("resample: sample count " + std::to_string(m) + " is below " +
                          std::to_string(DiscreteCurve::kMinSamples));
  }
  const int n = c.size();
  std::vector<double> cumulative(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    cumulative[i + 1] = cumulative[i] + (c.point((i + 1) % n) - c.point(i)).norm();
  }
  const double total = cumulative[n];
  PointArray out(m, 2);
  int edge = 0;
  for (int k = 0; k < m; ++k) {
    const double s = total * k / m;
    while (edge < n - 1 && cumulative[edge + 1] <= s) ++edge;
    const double len = cumulative[edge + 1] - cumulative[edge];
    const double t = (s - cumulative[edge]) / len;
    out.row(k) = ((1.0 - t) * c.point(edge) + t * c.point((edge + 1) % n)).transpose();
  }
  return DiscreteCurve(std::move(out));
}

DiscreteCurve displaced(const DiscreteCurve& c, const BoundaryVectorField& v, double t) {
  require_bound(v, c);
  DiscreteCurve out(c.points() + t * v.vectors);
  if (out.was_reversed()) throw InvalidCurve("displacement reverses the curve orientation");
  return out;
}

double spectral_area(const DiscreteCurve& c) {
  const auto& p = c.points();
  const auto& d = c.c_theta();
  return 0.5 * c.parameter_step() *
         (p.col(0).cwiseProduct(d.col(1)) - p.col(1).cwiseProduct(d.col(0))).sum();
}

}  // namespace shapeopt
