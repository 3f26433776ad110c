#include "shapeopt/steklov.hpp"

#include "shapeopt/errors.hpp"

namespace shapeopt {

Eigen::VectorXd assemble_rhs(const TriMesh& mesh, const ShapeProblem& problem,
                             const StateBundle* state) {
  if (!mesh.has_gamma()) throw MeshError("deformation system needs an interface loop");
  Eigen::VectorXd rhs = volume_gradient(problem, mesh, state);
  const std::vector<char> near = gamma_adjacent_nodes(mesh);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (!near[i] || mesh.marks()[i] == kOuterNode) {
      rhs[2 * i] = 0.0;
      rhs[2 * i + 1] = 0.0;
    }
  }

  const DiscreteCurve curve = extract_gamma_curve(mesh);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(curve.size());
  if (problem.kind == ProblemKind::perimeter) r = curvature(curve).values;
  if (problem.nu != 0.0) r += problem.nu * curvature(curve).values;
  if (!r.isZero(0.0)) {
    const Eigen::VectorXd ds = curve.ds();
    const auto& loop = mesh.gamma_loop();
    for (int i = 0; i < curve.size(); ++i) {
      for (int d = 0; d < 2; ++d) rhs[2 * loop[i] + d] += r[i] * curve.normal()(i, d) * ds[i];
    }
  }
  return rhs;
}

DeformationSystem assemble_deformation_system(const TriMesh& mesh, const ShapeProblem& problem,
                                              const StateBundle* state,
                                              const ElasticityParams& elasticity,
                                              const CgOptions& cg) {
  Eigen::VectorXd rhs = assemble_rhs(mesh, problem, state);
  const DiscreteCurve curve = extract_gamma_curve(mesh);
  return DeformationSystem{assemble_elasticity(mesh, elasticity), std::move(rhs), mesh.gamma_loop(),
                           BoundaryVectorField(curve.normal()), cg};
}

DeformationSolution solve_deformation(const DeformationSystem& sys) {
  const Eigen::VectorXd u = solve_spd(sys.op, sys.rhs, sys.cg);
  DeformationSolution out;
  out.u = unflatten(u);
  Eigen::VectorXd h(static_cast<int>(sys.gamma_dof.size()));
  for (int i = 0; i < h.size(); ++i) {
    h[i] = out.u.row(sys.gamma_dof[i]).dot(sys.normals.vectors.row(i));
  }
  out.h = BoundaryScalarField(std::move(h));
  return out;
}

double steklov_inner(const NodalVectorField& u1, const NodalVectorField& u2,
                     const SparseSpdOperator& op) {
  if (2 * u1.rows() != op.dimension() || 2 * u2.rows() != op.dimension()) {
    throw InvalidArgument("deformation fields do not match the operator dimension");
  }
  return op.form(flatten(u1), flatten(u2));
}

}  // namespace shapeopt
