#include "shapeopt/fem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

std::string format_residual(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", r);
  return buf;
}

double distance_to_polygon(const Vec2& p, const PointArray& poly) {
  double best = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(poly.rows());
  for (int i = 0; i < n; ++i) {
    const Vec2 a = poly.row(i).transpose();
    const Vec2 b = poly.row((i + 1) % n).transpose();
    const Vec2 ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (p - (a + t * ab)).norm());
  }
  return best;
}

std::vector<char> outer_dofs(const TriMesh& mesh, int per_node) {
  std::vector<char> fixed(static_cast<std::size_t>(mesh.num_nodes()) * per_node, 0);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (mesh.marks()[i] == kOuterNode) {
      for (int d = 0; d < per_node; ++d) fixed[per_node * i + d] = 1;
    }
  }
  return fixed;
}

void masked_product(const SparseMatrix& k, const std::vector<char>& fixed, const Eigen::VectorXd& x,
                    Eigen::VectorXd& y) {
  y.noalias() = k * x;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (fixed[i]) y[i] = 0.0;
  }
}

// CG on the free entries of K x = b, with x preset at fixed entries (lifting).
Eigen::VectorXd masked_cg(const SparseMatrix& k, const std::vector<char>& fixed, Eigen::VectorXd b,
                          Eigen::VectorXd x, const CgOptions& opts, CgReport* report) {
  const Eigen::Index n = b.size();
  Eigen::VectorXd lift = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (fixed[i]) lift[i] = x[i];
  }
  if (lift.squaredNorm() > 0.0) b -= k * lift;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (fixed[i]) b[i] = 0.0;
  }

  Eigen::VectorXd inv_diag = Eigen::VectorXd::Ones(n);
  if (opts.jacobi) {
    const Eigen::VectorXd diag = k.diagonal();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!fixed[i] && diag[i] > 0.0) inv_diag[i] = 1.0 / diag[i];
    }
  }

  const double bnorm = b.norm();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  CgReport local;
  if (bnorm == 0.0) {
    if (report) *report = local;
    return lift;
  }
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : static_cast<int>(10 * n + 100);
  Eigen::VectorXd r = b;
  Eigen::VectorXd z(n);
  Eigen::VectorXd p(n);
  Eigen::VectorXd q(n);
  double rel = 1.0;
  int it = 0;
  // Restarts from the true residual until it meets the tolerance.
  for (int restart = 0; restart < 4; ++restart) {
    z = inv_diag.cwiseProduct(r);
    p = z;
    double rz = r.dot(z);
    for (; it < max_iter; ++it) {
      masked_product(k, fixed, p, q);
      const double pq = p.dot(q);
      if (!(pq > 0.0)) throw SolverError("operator is not positive definite on the free space", rel);
      const double alpha = rz / pq;
      u += alpha * p;
      r -= alpha * q;
      if (r.norm() / bnorm <= opts.rel_tol) {
        ++it;
        break;
      }
      z = inv_diag.cwiseProduct(r);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    masked_product(k, fixed, u, q);
    r = b - q;
    rel = r.norm() / bnorm;
    if (rel <= opts.rel_tol || it >= max_iter) break;
  }
  local.iterations = it;
  local.relative_residual = rel;
  if (report) *report = local;
  if (rel > opts.rel_tol) {
    throw SolverError("conjugate gradients did not converge in " + std::to_string(it) +
                          " iterations (relative residual " + format_residual(rel) + ")",
                      rel);
  }
  return u + lift;
}

Eigen::Matrix<double, 3, 3> plane_strain(double lambda, double mu) {
  Eigen::Matrix<double, 3, 3> d;
  d << lambda + 2.0 * mu, lambda, 0.0, lambda, lambda + 2.0 * mu, 0.0, 0.0, 0.0, mu;
  return d;
}

}  // namespace

SparseSpdOperator::SparseSpdOperator(SparseMatrix matrix, std::vector<char> constrained)
    : matrix_(std::move(matrix)), constrained_(std::move(constrained)) {
  if (matrix_.rows() != matrix_.cols() ||
      static_cast<std::size_t>(matrix_.rows()) != constrained_.size()) {
    throw InvalidArgument("operator and constraint mask dimensions disagree");
  }
}

double SparseSpdOperator::form(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  if (u.size() != dimension() || v.size() != dimension()) {
    throw InvalidArgument("bilinear form argument has the wrong dimension");
  }
  return u.dot(matrix_ * v);
}

Eigen::VectorXd solve_spd(const SparseSpdOperator& op, const Eigen::VectorXd& rhs,
                          const CgOptions& opts, CgReport* report) {
  if (rhs.size() != op.dimension()) throw InvalidArgument("right-hand side has the wrong dimension");
  for (int i = 0; i < op.dimension(); ++i) {
    if (op.is_constrained(i) && rhs[i] != 0.0) {
      throw InvalidArgument("right-hand side is nonzero at constrained entry " + std::to_string(i));
    }
  }
  return masked_cg(op.matrix(), op.constrained(), rhs, Eigen::VectorXd::Zero(rhs.size()), opts,
                   report);
}

Eigen::VectorXd solve_spd_prescribed(const SparseSpdOperator& op, const Eigen::VectorXd& rhs,
                                     const std::vector<char>& fixed, const Eigen::VectorXd& values,
                                     const CgOptions& opts, CgReport* report) {
  const int n = op.dimension();
  if (rhs.size() != n || values.size() != n || static_cast<int>(fixed.size()) != n) {
    throw InvalidArgument("prescribed solve arguments have the wrong dimension");
  }
  std::vector<char> mask(n, 0);
  Eigen::VectorXd start = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (fixed[i]) {
      mask[i] = 1;
      start[i] = values[i];
    } else if (op.is_constrained(i)) {
      mask[i] = 1;
    }
  }
  return masked_cg(op.matrix(), mask, rhs, start, opts, report);
}

Eigen::VectorXd flatten(const NodalVectorField& u) {
  Eigen::VectorXd out(2 * u.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    out[2 * i] = u(i, 0);
    out[2 * i + 1] = u(i, 1);
  }
  return out;
}

NodalVectorField unflatten(const Eigen::VectorXd& u) {
  NodalVectorField out(u.size() / 2, 2);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out(i, 0) = u[2 * i];
    out(i, 1) = u[2 * i + 1];
  }
  return out;
}

Eigen::Matrix<double, 3, 2> p1_gradients(const TriMesh& mesh, int t) {
  const auto tri = mesh.triangles().row(t);
  const Vec2 p[3] = {mesh.node(tri(0)), mesh.node(tri(1)), mesh.node(tri(2))};
  const double twice_area = 2.0 * mesh.triangle_area(t);
  Eigen::Matrix<double, 3, 2> g;
  for (int i = 0; i < 3; ++i) {
    const Vec2& a = p[(i + 1) % 3];
    const Vec2& b = p[(i + 2) % 3];
    g(i, 0) = (a.y() - b.y()) / twice_area;
    g(i, 1) = (b.x() - a.x()) / twice_area;
  }
  return g;
}

SparseSpdOperator assemble_elasticity(const TriMesh& mesh, const ElasticityParams& params) {
  if (!(params.mu > 0.0) || !(params.lambda >= 0.0)) {
    throw InvalidArgument("invalid Lame parameters: need mu > 0 and lambda >= 0");
  }
  PointArray gamma;
  if (params.stiffening && mesh.has_gamma()) {
    gamma.resize(static_cast<int>(mesh.gamma_loop().size()), 2);
    for (int i = 0; i < gamma.rows(); ++i) gamma.row(i) = mesh.nodes().row(mesh.gamma_loop()[i]);
  }
  const int n = mesh.num_nodes();
  Triplets trips;
  trips.reserve(36 * static_cast<std::size_t>(mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles().row(t);
    double mu = params.mu;
    if (gamma.rows() > 0) {
      const Vec2 centroid = (mesh.node(tri(0)) + mesh.node(tri(1)) + mesh.node(tri(2))) / 3.0;
      const double dist = distance_to_polygon(centroid, gamma);
      mu = std::min(50.0 * params.mu, params.mu * (1.0 + 1.0 / dist));
    }
    const auto g = p1_gradients(mesh, t);
    Eigen::Matrix<double, 3, 6> b = Eigen::Matrix<double, 3, 6>::Zero();
    for (int i = 0; i < 3; ++i) {
      b(0, 2 * i) = g(i, 0);
      b(1, 2 * i + 1) = g(i, 1);
      b(2, 2 * i) = g(i, 1);
      b(2, 2 * i + 1) = g(i, 0);
    }
    const Eigen::Matrix<double, 6, 6> ke =
        mesh.triangle_area(t) * (b.transpose() * plane_strain(params.lambda, mu) * b);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        trips.emplace_back(2 * tri(i / 2) + i % 2, 2 * tri(j / 2) + j % 2, ke(i, j));
      }
    }
  }
  SparseMatrix k(2 * n, 2 * n);
  k.setFromTriplets(trips.begin(), trips.end());
  return SparseSpdOperator(std::move(k), outer_dofs(mesh, 2));
}

SparseSpdOperator assemble_elasticity(const TriMesh& mesh, double lambda, double mu) {
  ElasticityParams p;
  p.lambda = lambda;
  p.mu = mu;
  return assemble_elasticity(mesh, p);
}

SparseSpdOperator assemble_poisson(const TriMesh& mesh, const Eigen::VectorXd& coeff) {
  if (coeff.size() != mesh.num_triangles()) {
    throw InvalidArgument("need one diffusion coefficient per triangle");
  }
  const int n = mesh.num_nodes();
  Triplets trips;
  trips.reserve(9 * static_cast<std::size_t>(mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (!(coeff[t] > 0.0)) {
      throw InvalidArgument("diffusion coefficient of triangle " + std::to_string(t) +
                            " is not positive");
    }
    const auto tri = mesh.triangles().row(t);
    const auto g = p1_gradients(mesh, t);
    const Eigen::Matrix3d ke = coeff[t] * mesh.triangle_area(t) * (g * g.transpose());
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) trips.emplace_back(tri(i), tri(j), ke(i, j));
    }
  }
  SparseMatrix k(n, n);
  k.setFromTriplets(trips.begin(), trips.end());
  return SparseSpdOperator(std::move(k), outer_dofs(mesh, 1));
}

Eigen::VectorXd poisson_load(const TriMesh& mesh, double source) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double share = source * mesh.triangle_area(t) / 3.0;
    for (int k = 0; k < 3; ++k) b[mesh.triangles()(t, k)] += share;
  }
  return b;
}

SparseMatrix mass_matrix(const TriMesh& mesh) {
  Triplets trips;
  trips.reserve(9 * static_cast<std::size_t>(mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.triangle_area(t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        trips.emplace_back(mesh.triangles()(t, i), mesh.triangles()(t, j),
                           area * (i == j ? 1.0 / 6.0 : 1.0 / 12.0));
      }
    }
  }
  SparseMatrix m(mesh.num_nodes(), mesh.num_nodes());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

TriMesh apply_deformation(const TriMesh& mesh, const NodalVectorField& u, double scale) {
  if (u.rows() != mesh.num_nodes()) throw InvalidArgument("deformation field has the wrong length");
  if (!u.allFinite()) throw InvalidArgument("deformation field is not finite");
  auto admissible = [&](double s) {
    const PointArray moved = mesh.nodes() + s * u;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const auto tri = mesh.triangles().row(t);
      if (!(signed_triangle_area(moved.row(tri(0)).transpose(), moved.row(tri(1)).transpose(),
                                 moved.row(tri(2)).transpose()) > 0.0)) {
        return false;
      }
    }
    return true;
  };
  if (admissible(scale)) return mesh.with_nodes(mesh.nodes() + scale * u);
  double lo = 0.0;
  double hi = scale;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (admissible(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw TangledMeshError("deformation with scale " + std::to_string(scale) +
                             " tangles the mesh; largest admissible scale is " + std::to_string(lo),
                         lo);
}

DiscreteCurve extract_gamma_curve(const TriMesh& mesh) {
  if (!mesh.has_gamma()) throw MeshError("mesh has no interface loop");
  const auto& loop = mesh.gamma_loop();
  PointArray p(static_cast<int>(loop.size()), 2);
  for (int i = 0; i < p.rows(); ++i) p.row(i) = mesh.nodes().row(loop[i]);
  try {
    return DiscreteCurve(std::move(p));
  } catch (const InvalidCurve& e) {
    throw MeshError(std::string("interface loop is degenerate: ") + e.what());
  }
}

}  // namespace shapeopt
