#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "shapeopt/curve.hpp"
#include "shapeopt/fem.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/sobolev.hpp"

namespace shapeopt {

/// Target data field ybar for tracking functionals, with its gradient.
class TargetField {
 public:
  TargetField();  // identically zero
  static TargetField analytic(std::function<double(const Vec2&)> value,
                              std::function<Vec2(const Vec2&)> gradient);
  /// P1 interpolant of nodal values on a reference mesh; points outside the mesh take the
  /// value of the nearest node.
  static TargetField nodal(const TriMesh& mesh, Eigen::VectorXd values);

  double value(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;

 private:
  struct Grid;
  std::function<double(const Vec2&)> value_;
  std::function<Vec2(const Vec2&)> gradient_;
  std::shared_ptr<const Grid> grid_;
};

enum class ProblemKind { perimeter, area_mismatch, poisson_tracking };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

/// A shape functional of the interface Gamma (or of the region it encloses).
///
/// perimeter:        J = L(Gamma)
/// area_mismatch:    J = (area - a_star)^2 + nu L(Gamma)
/// poisson_tracking: J = 1/2 int_X (y - ybar)^2 + nu L(Gamma), where -div(k grad y) = source,
///                   k = k_in inside Gamma and k_out outside, y = 0 on the outer boundary.
///
/// Length and area are those of the trigonometric interpolant of the Gamma samples.
struct ShapeProblem {
  ProblemKind kind = ProblemKind::perimeter;
  double a_star = std::numbers::pi;
  double nu = 0.0;
  double k_in = 1.0;
  double k_out = 1.0;
  double source = 1.0;
  TargetField target;
  CgOptions cg;

  static ShapeProblem perimeter();
  static ShapeProblem area_mismatch(double a_star, double nu = 0.0);
  static ShapeProblem poisson_tracking(double k_in, double k_out, double source,
                                       TargetField target, double nu = 0.0);

  bool needs_mesh() const { return kind == ProblemKind::poisson_tracking; }
  void validate() const;
};

/// State y and adjoint p as nodal fields on the mesh.
struct StateBundle {
  Eigen::VectorXd y;
  Eigen::VectorXd p;
  double state_residual = 0.0;
  double adjoint_residual = 0.0;
};

/// Per-triangle diffusion coefficient by region.
Eigen::VectorXd region_coefficients(const ShapeProblem& problem, const TriMesh& mesh);

StateBundle solve_state_adjoint(const ShapeProblem& problem, const TriMesh& mesh);
/// State only (the adjoint field is left empty).
Eigen::VectorXd solve_state(const ShapeProblem& problem, const TriMesh& mesh);

double evaluate(const ShapeProblem& problem, const DiscreteCurve& curve);
double evaluate(const ShapeProblem& problem, const TriMesh& mesh);
/// 1/2 int_X (y - ybar)^2 dx with a degree-4 rule per triangle.
double tracking_term(const ShapeProblem& problem, const TriMesh& mesh, const Eigen::VectorXd& y);

/// L2 density r with DJ[V] = int_Gamma r <V, n> ds.
BoundaryScalarField surface_density(const ShapeProblem& problem, const DiscreteCurve& curve);
BoundaryScalarField surface_density(const ShapeProblem& problem, const TriMesh& mesh,
                                    const StateBundle* state);

/// int_Gamma r <V, n> ds with V restricted to the Gamma nodes.
double surface_derivative(const ShapeProblem& problem, const TriMesh& mesh,
                          const StateBundle* state, const NodalVectorField& v);

/// Volume-form derivative under the node motion x + t V. For the tracking term it is the exact
/// derivative of the discrete functional; area and length use the spectral curve.
double volume_derivative(const ShapeProblem& problem, const TriMesh& mesh,
                         const StateBundle* state, const NodalVectorField& v);

/// Coefficients g with DJ_vol[V] = g . flatten(V) for the volume part of the derivative
/// (everything except the nu-weighted length, which enters through the surface route).
Eigen::VectorXd volume_gradient(const ShapeProblem& problem, const TriMesh& mesh,
                                const StateBundle* state);

struct FdEstimate {
  double value = 0.0;           ///< Richardson-extrapolated estimate
  double observed_order = 0.0;  ///< from successive central differences
  std::vector<double> steps;    ///< steps actually used (after any shrinking)
  std::vector<double> quotients;
};

inline const std::vector<double> kDefaultFdSteps{1e-3, 5e-4, 2.5e-4};

FdEstimate eulerian_derivative_fd(const ShapeProblem& problem, const DiscreteCurve& curve,
                                  const BoundaryVectorField& v,
                                  const std::vector<double>& t_steps = kDefaultFdSteps);
FdEstimate eulerian_derivative_fd(const ShapeProblem& problem, const TriMesh& mesh,
                                  const NodalVectorField& v,
                                  const std::vector<double>& t_steps = kDefaultFdSteps);

/// Hessian of a curve-evaluable problem (perimeter, area_mismatch); see shape_hessian_apply.
BoundaryVectorField shape_hessian_apply(const ShapeProblem& problem, const DiscreteCurve& c,
                                        const BoundaryVectorField& h, const SobolevParams& p,
                                        double fd_step = 1e-5);

}  // namespace shapeopt
