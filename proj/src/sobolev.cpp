#include "shapeopt/sobolev.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <iostream>
#include <string>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

Eigen::LLT<Eigen::MatrixXd> factor_L1(const DiscreteCurve& c, const SobolevParams& p) {
  const Eigen::MatrixXd& d = spectral_differentiation_matrix(c.size());
  const Eigen::VectorXd inv_speed = c.speed().cwiseInverse();
  Eigen::MatrixXd m = p.A * (d.transpose() * inv_speed.asDiagonal() * d);
  m.diagonal() += c.speed();
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw SolverError("L1 factorization failed");
  return llt;
}

Eigen::VectorXd ds_twice(const Eigen::VectorXd& f, const DiscreteCurve& c) {
  const Eigen::VectorXd once = periodic_derivative(f).cwiseQuotient(c.speed());
  return periodic_derivative(once).cwiseQuotient(c.speed());
}

// Nodal u = <D_s m, v>.
Eigen::VectorXd stretch_rate(const BoundaryVectorField& m, const DiscreteCurve& c) {
  const BoundaryVectorField dm = arc_length_derivative(m, c);
  return dm.vectors.cwiseProduct(c.tangent()).rowwise().sum();
}

}  // namespace

SobolevParams::SobolevParams(double a) : A(a) {
  if (!(a > 0.0)) throw InvalidArgument("Sobolev parameter A must be positive, got " + std::to_string(a));
}

double l2_inner(const BoundaryScalarField& alpha, const BoundaryScalarField& beta,
                const DiscreteCurve& c) {
  require_bound(alpha, c);
  require_bound(beta, c);
  return (alpha.values.cwiseProduct(beta.values)).dot(c.ds());
}

double l2_inner(const BoundaryVectorField& h, const BoundaryVectorField& k, const DiscreteCurve& c) {
  require_bound(h, c);
  require_bound(k, c);
  return h.vectors.cwiseProduct(k.vectors).rowwise().sum().dot(c.ds());
}

double sobolev_inner(const BoundaryScalarField& alpha, const BoundaryScalarField& beta,
                     const DiscreteCurve& c, const SobolevParams& p) {
  return l2_inner(alpha, beta, c) +
         p.A * l2_inner(arc_length_derivative(alpha, c), arc_length_derivative(beta, c), c);
}

double sobolev_inner(const BoundaryVectorField& h, const BoundaryVectorField& k,
                     const DiscreteCurve& c, const SobolevParams& p) {
  return l2_inner(h, k, c) +
         p.A * l2_inner(arc_length_derivative(h, c), arc_length_derivative(k, c), c);
}

BoundaryScalarField apply_L1(const BoundaryScalarField& q, const DiscreteCurve& c,
                             const SobolevParams& p) {
  require_bound(q, c);
  return BoundaryScalarField(q.values - p.A * ds_twice(q.values, c));
}

BoundaryVectorField apply_L1(const BoundaryVectorField& q, const DiscreteCurve& c,
                             const SobolevParams& p) {
  require_bound(q, c);
  PointArray out(q.size(), 2);
  for (int d = 0; d < 2; ++d) {
    const Eigen::VectorXd col = q.vectors.col(d);
    out.col(d) = col - p.A * ds_twice(col, c);
  }
  return BoundaryVectorField(std::move(out));
}

BoundaryScalarField solve_L1(const BoundaryScalarField& r, const DiscreteCurve& c,
                             const SobolevParams& p) {
  require_bound(r, c);
  if (!(p.A > 0.0)) throw SolverError("L1 is singular unless A > 0");
  const auto llt = factor_L1(c, p);
  return BoundaryScalarField(llt.solve(Eigen::VectorXd(c.speed().cwiseProduct(r.values))));
}

BoundaryVectorField solve_L1(const BoundaryVectorField& r, const DiscreteCurve& c,
                             const SobolevParams& p) {
  require_bound(r, c);
  if (!(p.A > 0.0)) throw SolverError("L1 is singular unless A > 0");
  const auto llt = factor_L1(c, p);
  Eigen::MatrixXd rhs = r.vectors;
  rhs.array().colwise() *= c.speed().array();
  return BoundaryVectorField(PointArray(llt.solve(rhs)));
}

BoundaryVectorField riemannian_gradient(const BoundaryScalarField& r, const DiscreteCurve& c,
                                        const SobolevParams& p) {
  return normal_field(solve_L1(r, c, p), c);
}

BoundaryVectorField connection_operand(const BoundaryVectorField& m, const BoundaryVectorField& h,
                                       const DiscreteCurve& c, const SobolevParams& p,
                                       ConnectionForm form) {
  require_bound(m, c);
  require_bound(h, c);
  const Eigen::VectorXd u = stretch_rate(m, c);
  PointArray out(h.size(), 2);
  for (int d = 0; d < 2; ++d) {
    const Eigen::VectorXd col = h.vectors.col(d);
    Eigen::VectorXd second;
    if (form == ConnectionForm::metric_compatible) {
      const Eigen::VectorXd ds_h = periodic_derivative(col).cwiseQuotient(c.speed());
      second = periodic_derivative(Eigen::VectorXd(u.cwiseProduct(ds_h))).cwiseQuotient(c.speed());
      out.col(d) = 0.5 * (u.cwiseProduct(col) + p.A * second);
    } else {
      second = ds_twice(col, c);
      out.col(d) = 0.5 * u.cwiseProduct(col + p.A * second);
    }
  }
  return BoundaryVectorField(std::move(out));
}

BoundaryVectorField covariant_derivative(const BoundaryVectorField& m, const BoundaryVectorField& h,
                                         const DiscreteCurve& c, const SobolevParams& p,
                                         ConnectionForm form) {
  return solve_L1(connection_operand(m, h, c, p, form), c, p);
}

double metric_directional_derivative(const BoundaryVectorField& h, const BoundaryVectorField& k,
                                     const BoundaryVectorField& m, const DiscreteCurve& c,
                                     const SobolevParams& p) {
  require_bound(h, c);
  require_bound(k, c);
  const Eigen::VectorXd u = stretch_rate(m, c);
  const BoundaryVectorField dh = arc_length_derivative(h, c);
  const BoundaryVectorField dk = arc_length_derivative(k, c);
  const Eigen::VectorXd integrand = h.vectors.cwiseProduct(k.vectors).rowwise().sum() -
                                    p.A * dh.vectors.cwiseProduct(dk.vectors).rowwise().sum();
  return u.cwiseProduct(integrand).dot(c.ds());
}

BoundaryVectorField shape_hessian_apply(const DensityFn& density, const DiscreteCurve& c,
                                        const BoundaryVectorField& h, const SobolevParams& p,
                                        double fd_step) {
  require_bound(h, c);
  if (!(fd_step > 0.0)) throw InvalidArgument("hessian fd_step must be positive");
  if (fd_step < 1e-8) {
    std::cerr << "warning: hessian fd_step " << fd_step
              << " is below 1e-8; round-off will dominate the difference quotient\n";
  }
  const BoundaryVectorField gradient = riemannian_gradient(density(c), c, p);

  PointArray derivative = PointArray::Zero(c.size(), 2);
  const double scale = h.vectors.cwiseAbs().maxCoeff();
  if (scale > 0.0) {
    const BoundaryVectorField unit(h.vectors / scale);
    auto grad_at = [&](double t) {
      const DiscreteCurve moved = displaced(c, unit, t);
      return riemannian_gradient(density(moved), moved, p).vectors;
    };
    auto central = [&](double t) -> PointArray { return (grad_at(t) - grad_at(-t)) / (2.0 * t); };
    const PointArray coarse = central(fd_step);
    const PointArray fine = central(0.5 * fd_step);
    derivative = scale * (4.0 * fine - coarse) / 3.0;
  }

  const BoundaryVectorField connection = covariant_derivative(h, gradient, c, p);
  return BoundaryVectorField(derivative + connection.vectors);
}

}  // namespace shapeopt
