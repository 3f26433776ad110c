#pragma once

#include <Eigen/Core>

#include <vector>

#include "shapeopt/fem.hpp"
#include "shapeopt/functionals.hpp"

namespace shapeopt {

/// Elasticity operator with the assembled right-hand side b(V) = DJ_vol[V] + DJ_surf[V].
struct DeformationSystem {
  SparseSpdOperator op;
  Eigen::VectorXd rhs;
  std::vector<int> gamma_dof;     ///< Gamma curve node i -> mesh node (dofs 2 n, 2 n + 1)
  BoundaryVectorField normals;    ///< exterior normals of the Gamma curve
  CgOptions cg;
};

/// rhs_j = DJ_vol[phi_j e_d] for nodes of triangles with a Gamma node and exactly 0 elsewhere,
/// plus the surface part r_i <e_d, n_i> ds_i at Gamma nodes. Perimeter and the nu-weighted
/// length enter through the surface part.
Eigen::VectorXd assemble_rhs(const TriMesh& mesh, const ShapeProblem& problem,
                             const StateBundle* state);

DeformationSystem assemble_deformation_system(const TriMesh& mesh, const ShapeProblem& problem,
                                              const StateBundle* state,
                                              const ElasticityParams& elasticity = {},
                                              const CgOptions& cg = {});

struct DeformationSolution {
  NodalVectorField u;
  BoundaryScalarField h;  ///< <U, n> on Gamma
};

DeformationSolution solve_deformation(const DeformationSystem& sys);

/// a(U1, U2)
double steklov_inner(const NodalVectorField& u1, const NodalVectorField& u2,
                     const SparseSpdOperator& op);

}  // namespace shapeopt
