#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <vector>

#include "shapeopt/curve.hpp"
#include "shapeopt/mesh.hpp"

namespace shapeopt {

/// One planar vector per mesh node (displacements U, test fields V).
using NodalVectorField = PointArray;

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Assembled symmetric bilinear form together with its Dirichlet-fixed degrees of freedom.
class SparseSpdOperator {
 public:
  SparseSpdOperator(SparseMatrix matrix, std::vector<char> constrained);

  int dimension() const { return static_cast<int>(matrix_.rows()); }
  /// The form before constraints are imposed.
  const SparseMatrix& matrix() const { return matrix_; }
  const std::vector<char>& constrained() const { return constrained_; }
  bool is_constrained(int dof) const { return constrained_[dof] != 0; }

  /// u^T K v
  double form(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

 private:
  SparseMatrix matrix_;
  std::vector<char> constrained_;
};

struct CgOptions {
  double rel_tol = 1e-10;
  int max_iter = 0;  ///< 0 selects 10 * dimension + 100
  bool jacobi = false;
};

struct CgReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Conjugate gradients on the free degrees of freedom. The right-hand side must vanish at
/// constrained entries; the solution is zero there.
Eigen::VectorXd solve_spd(const SparseSpdOperator& op, const Eigen::VectorXd& rhs,
                          const CgOptions& opts = {}, CgReport* report = nullptr);

/// Same solve with additional prescribed values: entries with fixed[i] set (or constrained in
/// op) take values[i], the rest satisfy K x = rhs.
Eigen::VectorXd solve_spd_prescribed(const SparseSpdOperator& op, const Eigen::VectorXd& rhs,
                                     const std::vector<char>& fixed, const Eigen::VectorXd& values,
                                     const CgOptions& opts = {}, CgReport* report = nullptr);

/// Degrees of freedom 2 i + d for node i, component d.
Eigen::VectorXd flatten(const NodalVectorField& u);
NodalVectorField unflatten(const Eigen::VectorXd& u);

struct ElasticityParams {
  double lambda = 0.0;
  double mu = 1.0;
  /// mu(T) = mu (1 + 1 / dist(T, Gamma)), capped at 50 mu.
  bool stiffening = false;
};

/// P1 plane-strain elasticity, int lambda div U div V + 2 mu eps(U) : eps(V), with U = 0 on
/// the outer boundary.
SparseSpdOperator assemble_elasticity(const TriMesh& mesh, const ElasticityParams& params = {});
SparseSpdOperator assemble_elasticity(const TriMesh& mesh, double lambda, double mu);

/// P1 stiffness of int k grad y . grad z with y = 0 on the outer boundary; one k per triangle.
SparseSpdOperator assemble_poisson(const TriMesh& mesh, const Eigen::VectorXd& coeff);

/// Consistent P1 load of a constant source, f |T| / 3 per vertex.
Eigen::VectorXd poisson_load(const TriMesh& mesh, double source);

/// Consistent P1 mass matrix.
SparseMatrix mass_matrix(const TriMesh& mesh);

/// Nodes moved to p + scale U. On tangling, throws TangledMeshError with the largest
/// admissible scale found by bisection.
TriMesh apply_deformation(const TriMesh& mesh, const NodalVectorField& u, double scale);

/// Gamma nodes in loop order as a curve.
DiscreteCurve extract_gamma_curve(const TriMesh& mesh);

/// Barycentric gradients of triangle t, one row per vertex.
Eigen::Matrix<double, 3, 2> p1_gradients(const TriMesh& mesh, int t);

}  // namespace shapeopt
