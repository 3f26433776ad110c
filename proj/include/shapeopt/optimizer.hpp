#pragma once

#include <Eigen/Core>

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shapeopt/fem.hpp"
#include "shapeopt/functionals.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/sobolev.hpp"

namespace shapeopt {

enum class Pipeline { sobolev, steklov };
enum class Method { steepest, lbfgs };

std::string to_string(Pipeline p);
std::string to_string(Method m);
Pipeline pipeline_from_string(const std::string& s);
Method method_from_string(const std::string& s);

using InnerProduct = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

struct CurvaturePair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho = 0.0;  ///< 1 / <y, s>
};

/// Limited-memory inverse-Hessian approximation in a caller-supplied inner product.
class LbfgsMemory {
 public:
  explicit LbfgsMemory(int capacity);

  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(pairs_.size()); }
  const std::deque<CurvaturePair>& pairs() const { return pairs_; }

  /// Stores (s, y) unless <y, s> <= 1e-12 |y| |s|; returns whether the pair was kept.
  bool push(const Eigen::VectorXd& s, const Eigen::VectorXd& y, const InnerProduct& inner);
  void clear() { pairs_.clear(); }

  /// Two-loop recursion H grad. With no stored pairs this returns grad unchanged.
  Eigen::VectorXd apply(const Eigen::VectorXd& grad, const InnerProduct& inner) const;

 private:
  int capacity_;
  std::deque<CurvaturePair> pairs_;
};

struct ArmijoConfig {
  double c1 = 1e-4;
  double rho = 0.5;
  double step0 = 1.0;
  int max_backtracks = 30;
};

struct ArmijoResult {
  double step = 0.0;
  double value = 0.0;
  int backtracks = 0;
  int rejected = 0;  ///< trials refused as geometrically invalid
};

/// Backtracking on t -> J(t). `trial` returns nullopt for an inadmissible step. Throws
/// LineSearchError unless slope < 0, or when no step passes within the backtracking budget.
ArmijoResult armijo_search(const std::function<std::optional<double>(double)>& trial, double j0,
                           double slope, const ArmijoConfig& cfg);

/// Curve-level search for problems evaluable on the curve alone, with slope DJ[direction].
/// Steps that self-intersect the curve are rejected.
ArmijoResult armijo_search(const ShapeProblem& problem, const DiscreteCurve& curve,
                           const BoundaryVectorField& direction, const ArmijoConfig& cfg);

struct IterateRecord {
  int iter = 0;
  double J = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;  ///< step accepted from this iterate (0 on the last one)
  double mesh_min_angle = 0.0;
  int backtracks = 0;
};

struct OptimizerConfig {
  Pipeline pipeline = Pipeline::sobolev;
  Method method = Method::lbfgs;
  int memory = 5;
  int max_iter = 500;
  double grad_tol = 1e-6;   ///< relative to the initial gradient norm
  double grad_atol = 1e-10;
  ArmijoConfig armijo;
  double min_angle_deg = 5.0;
  /// Upper bound on the boundary displacement of the first trial step.
  double max_displacement = 0.25;
  /// Memory is cleared once the boundary has moved this fraction of its length since the
  /// last clear.
  double flush_fraction = 0.1;
  /// Sobolev pipeline only: add the tangential field that keeps the relative spacing of the
  /// Gamma nodes fixed to first order (see redistribution_field).
  bool redistribute = false;
  SobolevParams sobolev;
  ElasticityParams elasticity;
  CgOptions cg;
  bool keep_snapshots = true;
  std::function<void(const IterateRecord&, const TriMesh&)> on_iterate;
};

struct OptimizationResult {
  TriMesh mesh;
  std::vector<IterateRecord> history;
  std::vector<DiscreteCurve> snapshots;
  bool converged = false;
  std::string stop_reason;
};

OptimizationResult optimize(const ShapeProblem& problem, const TriMesh& initial,
                            const OptimizerConfig& cfg);

/// Boundary values on Gamma extended into the mesh by elasticity, with the outer boundary fixed.
NodalVectorField extend_boundary_field(const TriMesh& mesh, const BoundaryVectorField& values,
                                       const ElasticityParams& elasticity, const CgOptions& cg);

/// Tangential field tau v for the normal motion alpha n, with D_s tau = mean(kappa alpha) -
/// kappa alpha and zero mean, so that |c_theta| / L is stationary to first order.
BoundaryVectorField redistribution_field(const DiscreteCurve& c, const BoundaryScalarField& alpha);

/// Boundary normal data alpha n on Gamma extended into the mesh by elasticity, with the outer
/// boundary fixed.
NodalVectorField extend_normal_field(const TriMesh& mesh, const DiscreteCurve& gamma,
                                     const BoundaryScalarField& alpha,
                                     const ElasticityParams& elasticity, const CgOptions& cg);

}  // namespace shapeopt
