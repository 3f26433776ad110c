#include <doctest.h>

#include <sstream>

#include "shapeopt/curve.hpp"
#include "shapeopt/curve_io.hpp"
#include "shapeopt/errors.hpp"
#include "support.hpp"

using namespace shapeopt;
using testsupport::kPi;

TEST_CASE("periodic derivative is exact on trigonometric polynomials") {
  for (int n : {16, 17, 64}) {
    Eigen::VectorXd f(n), df(n);
    for (int i = 0; i < n; ++i) {
      const double t = 2 * kPi * i / n;
      f[i] = 2.0 + std::sin(3 * t) - 0.5 * std::cos(7 * t);
      df[i] = 3 * std::cos(3 * t) + 3.5 * std::sin(7 * t);
    }
    CHECK((periodic_derivative(f) - df).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("Nyquist mode is removed for even N") {
  const int n = 16;
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) f[i] = (i % 2 == 0) ? 1.0 : -1.0;
  CHECK(periodic_derivative(f).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("dense differentiation matrix reproduces the FFT derivative and is skew") {
  std::mt19937_64 rng(3);
  for (int n : {24, 25}) {
    const Eigen::MatrixXd& d = spectral_differentiation_matrix(n);
    CHECK((d + d.transpose()).cwiseAbs().maxCoeff() < 1e-13);
    const Eigen::VectorXd f = testsupport::random_band_limited(rng, n, 6);
    CHECK((d * f - periodic_derivative(f)).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("periodic antiderivative inverts the derivative up to the mean") {
  std::mt19937_64 rng(4);
  Eigen::VectorXd f = testsupport::random_band_limited(rng, 40, 8);
  f.array() -= f.mean();
  CHECK((periodic_derivative(periodic_antiderivative(f)) - f).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(periodic_antiderivative(f).mean()) < 1e-14);
}

TEST_CASE("circle geometry") {
  const double r = 1.7;
  const DiscreteCurve c = DiscreteCurve::circle(64, r, Vec2(0.3, -0.2));
  CHECK((c.speed().array() - r).abs().maxCoeff() < 1e-12);
  CHECK(curve_length(c) == doctest::Approx(2 * kPi * r).epsilon(1e-13));
  CHECK((curvature(c).values.array() - 1.0 / r).abs().maxCoeff() < 1e-11);
  CHECK(spectral_area(c) == doctest::Approx(kPi * r * r).epsilon(1e-13));
  for (int i = 0; i < c.size(); ++i) {
    const Vec2 radial = (c.point(i) - Vec2(0.3, -0.2)) / r;
    CHECK((Vec2(c.normal().row(i).transpose()) - radial).norm() < 1e-12);
  }
  const ArcLengthMeasure m = arc_length_measure(c);
  CHECK(m.total == doctest::Approx(2 * kPi * r).epsilon(1e-13));
}

TEST_CASE("ellipse curvature matches the closed form") {
  const double a = 2.0, b = 1.0;
  const DiscreteCurve c = DiscreteCurve::ellipse(128, a, b);
  const BoundaryScalarField k = curvature(c);
  double err = 0.0;
  for (int i = 0; i < c.size(); ++i) {
    const double t = c.parameter_step() * i;
    const double exact = a * b / std::pow(a * a * std::sin(t) * std::sin(t) + b * b * std::cos(t) * std::cos(t), 1.5);
    err = std::max(err, std::abs(k[i] - exact));
  }
  CHECK(err < 1e-9);
}

TEST_CASE("clockwise input is reversed keeping sample 0") {
  const DiscreteCurve ccw = DiscreteCurve::circle(16, 1.0);
  PointArray cw(16, 2);
  for (int i = 0; i < 16; ++i) cw.row(i) = ccw.points().row((16 - i) % 16);
  const DiscreteCurve c(cw);
  CHECK(c.was_reversed());
  CHECK(c.point(0).isApprox(ccw.point(0)));
  CHECK((c.points() - ccw.points()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_FALSE(ccw.was_reversed());
}

TEST_CASE("invalid sample sequences are rejected") {
  CHECK_THROWS_AS(DiscreteCurve::circle(7, 1.0), InvalidCurve);
  PointArray p = DiscreteCurve::circle(12, 1.0).points();
  p.row(5) = p.row(4);
  CHECK_THROWS_AS(DiscreteCurve{p}, InvalidCurve);
  PointArray q = DiscreteCurve::circle(12, 1.0).points();
  q(3, 1) = std::nan("");
  CHECK_THROWS_AS(DiscreteCurve{q}, InvalidCurve);
  PointArray line(8, 2);
  for (int i = 0; i < 8; ++i) line.row(i) = Eigen::RowVector2d(i < 4 ? i : 7 - i + 0.5, 0.0);
  CHECK_THROWS_AS(DiscreteCurve{line}, InvalidCurve);
}

TEST_CASE("frame, decomposition and arc-length derivative properties on random curves") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const DiscreteCurve c = testsupport::random_curve(rng, 96);
    const Frame f = unit_tangent_normal(c);
    CHECK((f.tangent.vectors.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-13);
    CHECK(f.tangent.vectors.cwiseProduct(f.normal.vectors).rowwise().sum().cwiseAbs().maxCoeff() < 1e-13);
    // D_s of a constant vanishes; D_s c is the unit tangent.
    CHECK(arc_length_derivative(BoundaryScalarField::constant(c.size(), 3.0), c).values.cwiseAbs().maxCoeff() < 1e-12);
    CHECK((arc_length_derivative(BoundaryVectorField(c.points()), c).vectors - c.tangent()).cwiseAbs().maxCoeff() <
          1e-10);
    const BoundaryVectorField h = testsupport::random_vector(rng, c.size());
    const NormalDecomposition d = normal_decompose(h, c);
    PointArray rebuilt = normal_field(d.alpha, c).vectors;
    rebuilt.array() += c.tangent().array().colwise() * d.tangential.values.array();
    CHECK((rebuilt - h.vectors).cwiseAbs().maxCoeff() < 1e-12);
    // Turning number one: the curvature integrates to 2 pi.
    CHECK(curvature(c).values.dot(c.ds()) == doctest::Approx(2 * kPi).epsilon(1e-6));
  }
}

TEST_CASE("fields must be bound to the curve") {
  const DiscreteCurve c = DiscreteCurve::circle(16, 1.0);
  CHECK_THROWS_AS(arc_length_derivative(BoundaryScalarField::constant(15, 1.0), c), InvalidArgument);
  CHECK_THROWS_AS(normal_decompose(BoundaryVectorField::constant(17, Vec2(1, 0)), c), InvalidArgument);
}

TEST_CASE("resample equidistributes polygonal arc length") {
  const DiscreteCurve c = DiscreteCurve::ellipse(200, 2.0, 0.7);
  const DiscreteCurve r = resample(c, 90);
  CHECK(r.size() == 90);
  CHECK(r.point(0).isApprox(c.point(0)));
  Eigen::VectorXd edges(90);
  for (int i = 0; i < 90; ++i) edges[i] = (r.point((i + 1) % 90) - r.point(i)).norm();
  CHECK(edges.maxCoeff() / edges.minCoeff() < 1.01);
  CHECK(spectral_area(r) == doctest::Approx(spectral_area(c)).epsilon(2e-3));
  CHECK_THROWS_AS(resample(c, 4), InvalidArgument);
}

TEST_CASE("displaced curves and area convergence") {
  const DiscreteCurve c = DiscreteCurve::circle(32, 1.0);
  const DiscreteCurve d = displaced(c, BoundaryVectorField(c.normal()), 0.5);
  CHECK(spectral_area(d) == doctest::Approx(kPi * 2.25).epsilon(1e-12));
  PointArray mirror = PointArray::Zero(32, 2);
  mirror.col(0) = -2.0 * c.points().col(0);  // (x, y) -> (-x, y) flips the orientation
  CHECK_THROWS_AS(displaced(c, BoundaryVectorField(mirror), 1.0), InvalidCurve);
  // Polygon area converges to pi at second order; the spectral area is exact.
  const double e1 = std::abs(polygon_signed_area(DiscreteCurve::circle(32, 1.0).points()) - kPi);
  const double e2 = std::abs(polygon_signed_area(DiscreteCurve::circle(64, 1.0).points()) - kPi);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("curve text round trip and parse errors") {
  std::mt19937_64 rng(5);
  const DiscreteCurve c = testsupport::random_curve(rng, 40);
  std::stringstream ss;
  write_curve(ss, c);
  const DiscreteCurve back = read_curve(ss);
  CHECK(back.size() == c.size());
  CHECK((back.points() - c.points()).cwiseAbs().maxCoeff() == 0.0);

  std::istringstream commented("# a square-ish octagon\n8\n1 0\n0.7 0.7\n\n0 1\n-0.7 0.7\n-1 0\n-0.7 -0.7\n0 -1\n0.7 -0.7\n");
  CHECK(read_curve(commented).size() == 8);

  std::istringstream bad("8\n1 0\n0.7 zero\n");
  try {
    read_curve(bad);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::istringstream truncated("9\n1 0\n0 1\n");
  CHECK_THROWS(read_curve(truncated));
}
