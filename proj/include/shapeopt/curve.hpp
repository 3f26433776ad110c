#pragma once

#include <Eigen/Core>

#include <functional>
#include <numbers>

#include "shapeopt/predicates.hpp"

namespace shapeopt {

using PointArray = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Per-node scalar values along a curve (normal coefficients, densities).
struct BoundaryScalarField {
  Eigen::VectorXd values;

  BoundaryScalarField() = default;
  explicit BoundaryScalarField(Eigen::VectorXd v) : values(std::move(v)) {}
  static BoundaryScalarField constant(int n, double value) {
    return BoundaryScalarField(Eigen::VectorXd::Constant(n, value));
  }

  int size() const { return static_cast<int>(values.size()); }
  double operator[](int i) const { return values[i]; }
};

/// Per-node planar vectors along a curve.
struct BoundaryVectorField {
  PointArray vectors;

  BoundaryVectorField() = default;
  explicit BoundaryVectorField(PointArray v) : vectors(std::move(v)) {}
  static BoundaryVectorField constant(int n, const Vec2& value) {
    PointArray v(n, 2);
    v.col(0).setConstant(value.x());
    v.col(1).setConstant(value.y());
    return BoundaryVectorField(std::move(v));
  }

  int size() const { return static_cast<int>(vectors.rows()); }
  Vec2 operator[](int i) const { return vectors.row(i).transpose(); }
};

/// Closed planar curve sampled at the uniform parameter nodes theta_i = 2 pi i / N.
///
/// The samples are interpreted as a band-limited trigonometric interpolant, so
/// derivatives with respect to theta are spectral. Construction rejects fewer
/// than `kMinSamples` points and zero-length edges, and reverses clockwise input
/// (keeping sample 0 in place) so that the outward normal is the tangent rotated
/// by -pi/2. Geometry derived from the samples is computed once and cached.
class DiscreteCurve {
 public:
  static constexpr int kMinSamples = 8;

  explicit DiscreteCurve(PointArray points);

  static DiscreteCurve sample(int n, const std::function<Vec2(double)>& param);
  static DiscreteCurve circle(int n, double radius, const Vec2& center = Vec2::Zero());
  static DiscreteCurve ellipse(int n, double semi_x, double semi_y,
                               const Vec2& center = Vec2::Zero());

  int size() const { return static_cast<int>(points_.rows()); }
  const PointArray& points() const { return points_; }
  Vec2 point(int i) const { return points_.row(i).transpose(); }
  bool was_reversed() const { return reversed_; }

  double parameter_step() const { return 2.0 * std::numbers::pi / size(); }
  const PointArray& c_theta() const { return c_theta_; }
  const Eigen::VectorXd& speed() const { return speed_; }
  /// Quadrature weights ds_i = |c_theta|_i * 2 pi / N.
  Eigen::VectorXd ds() const { return speed_ * parameter_step(); }
  const PointArray& tangent() const { return tangent_; }
  const PointArray& normal() const { return normal_; }

 private:
  PointArray points_;
  PointArray c_theta_;
  Eigen::VectorXd speed_;
  PointArray tangent_;
  PointArray normal_;
  bool reversed_ = false;
};

// Periodic Fourier differentiation of sequences on the uniform theta grid. For
// even N the Nyquist mode is dropped, which keeps the operator skew-symmetric.
Eigen::VectorXd periodic_derivative(const Eigen::VectorXd& f);
PointArray periodic_derivative(const PointArray& f);

/// Zero-mean periodic antiderivative in theta; the mean of f is ignored.
Eigen::VectorXd periodic_antiderivative(const Eigen::VectorXd& f);

/// Dense N x N matrix of the same operator: D_ij = 1/2 (-1)^(i-j) cot((i-j) pi / N)
/// for even N, csc instead of cot for odd N. Cached per N.
const Eigen::MatrixXd& spectral_differentiation_matrix(int n);

BoundaryVectorField circumferential_derivative(const DiscreteCurve& c);

struct ArcLengthMeasure {
  BoundaryScalarField speed;  ///< nodal |c_theta|
  double total = 0.0;         ///< sum_i |c_theta|_i 2 pi / N
};
ArcLengthMeasure arc_length_measure(const DiscreteCurve& c);
double curve_length(const DiscreteCurve& c);

/// D_s f = (d f / d theta) / |c_theta|, componentwise for vector fields.
BoundaryScalarField arc_length_derivative(const BoundaryScalarField& f, const DiscreteCurve& c);
BoundaryVectorField arc_length_derivative(const BoundaryVectorField& f, const DiscreteCurve& c);

struct Frame {
  BoundaryVectorField tangent;
  BoundaryVectorField normal;  ///< exterior unit normal
};
Frame unit_tangent_normal(const DiscreteCurve& c);

/// Signed curvature, positive on convex CCW curves (1/R on a circle of radius R).
BoundaryScalarField curvature(const DiscreteCurve& c);

struct NormalDecomposition {
  BoundaryScalarField alpha;       ///< <h, n>
  BoundaryScalarField tangential;  ///< <h, v>
};
NormalDecomposition normal_decompose(const BoundaryVectorField& h, const DiscreteCurve& c);

/// alpha * n
BoundaryVectorField normal_field(const BoundaryScalarField& alpha, const DiscreteCurve& c);

/// M points on the polygonal image of `c`, equidistributed in polygonal arc length,
/// starting at sample 0.
DiscreteCurve resample(const DiscreteCurve& c, int m);

/// Points c_i + t * v_i as a new curve (orientation re-normalized).
DiscreteCurve displaced(const DiscreteCurve& c, const BoundaryVectorField& v, double t);

/// Area enclosed by the trigonometric interpolant, 1/2 int (x y_theta - y x_theta) dtheta.
double spectral_area(const DiscreteCurve& c);
/// Shoelace area of the sample polygon (signed, positive for CCW).
double polygon_signed_area(const PointArray& points);

void require_bound(const BoundaryScalarField& f, const DiscreteCurve& c);
void require_bound(const BoundaryVectorField& f, const DiscreteCurve& c);

}  // namespace shapeopt
