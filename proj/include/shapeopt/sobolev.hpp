#pragma once

#include <functional>

#include "shapeopt/curve.hpp"

namespace shapeopt {

struct SobolevParams {
  double A = 0.1;

  SobolevParams() = default;
  explicit SobolevParams(double a);  // throws InvalidArgument unless a > 0
};

/// g0: sum_i alpha_i beta_i ds_i.
double l2_inner(const BoundaryScalarField& alpha, const BoundaryScalarField& beta,
                const DiscreteCurve& c);
double l2_inner(const BoundaryVectorField& h, const BoundaryVectorField& k, const DiscreteCurve& c);

/// g1 on normal coefficients, (alpha, beta) + A (D_s alpha, D_s beta).
double sobolev_inner(const BoundaryScalarField& alpha, const BoundaryScalarField& beta,
                     const DiscreteCurve& c, const SobolevParams& p);
/// Componentwise g1 on vector fields along c.
double sobolev_inner(const BoundaryVectorField& h, const BoundaryVectorField& k,
                     const DiscreteCurve& c, const SobolevParams& p);

/// (I - A D_s D_s) q
BoundaryScalarField apply_L1(const BoundaryScalarField& q, const DiscreteCurve& c,
                             const SobolevParams& p);
BoundaryVectorField apply_L1(const BoundaryVectorField& q, const DiscreteCurve& c,
                             const SobolevParams& p);

/// Solves (I - A D_s D_s) q = r through the symmetric form (S + A D^T S^-1 D) q = S r,
/// S = diag |c_theta|, with a dense Cholesky factorization.
BoundaryScalarField solve_L1(const BoundaryScalarField& r, const DiscreteCurve& c,
                             const SobolevParams& p);
BoundaryVectorField solve_L1(const BoundaryVectorField& r, const DiscreteCurve& c,
                             const SobolevParams& p);

/// q n with q = L1^-1 r.
BoundaryVectorField riemannian_gradient(const BoundaryScalarField& r, const DiscreteCurve& c,
                                        const SobolevParams& p);

enum class ConnectionForm {
  /// K1 h = 1/2 (u h + A D_s(u D_s h)), u = <D_s m, v>. Compatible with g1 for every m.
  metric_compatible,
  /// K1 h = 1/2 u (h + A D_s D_s h). Agrees with the above when u is constant along c.
  uniform_weight,
};

BoundaryVectorField connection_operand(const BoundaryVectorField& m, const BoundaryVectorField& h,
                                       const DiscreteCurve& c, const SobolevParams& p,
                                       ConnectionForm form = ConnectionForm::metric_compatible);

/// L1^-1 K1 h, with L1^-1 applied componentwise.
BoundaryVectorField covariant_derivative(const BoundaryVectorField& m, const BoundaryVectorField& h,
                                         const DiscreteCurve& c, const SobolevParams& p,
                                         ConnectionForm form = ConnectionForm::metric_compatible);

/// Variation of g1_c(h, k) as c moves along m with the nodal values of h and k held fixed:
/// int <D_s m, v> (<h, k> - A <D_s h, D_s k>) ds.
double metric_directional_derivative(const BoundaryVectorField& h, const BoundaryVectorField& k,
                                     const BoundaryVectorField& m, const DiscreteCurve& c,
                                     const SobolevParams& p);

/// L2 surface density r of a shape functional evaluated on a curve.
using DensityFn = std::function<BoundaryScalarField(const DiscreteCurve&)>;

/// Hess J[h]: Richardson-extrapolated central difference of the gradient field along c + t h,
/// plus the connection term with m = h. Warns on stderr for fd_step < 1e-8.
BoundaryVectorField shape_hessian_apply(const DensityFn& density, const DiscreteCurve& c,
                                        const BoundaryVectorField& h, const SobolevParams& p,
                                        double fd_step = 1e-5);

}  // namespace shapeopt
