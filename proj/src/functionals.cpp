#include "shapeopt/functionals.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

// Degree-4 rule on the reference triangle: barycentric coordinates and weights (sum 1).
struct QuadPoint {
  std::array<double, 3> bary;
  double weight;
};

const std::array<QuadPoint, 6>& quadrature() {
  static const std::array<QuadPoint, 6> rule = [] {
    const double a1 = 0.445948490915965, b1 = 1.0 - 2.0 * a1, w1 = 0.223381589678011;
    const double a2 = 0.091576213509771, b2 = 1.0 - 2.0 * a2, w2 = 0.109951743655322;
    return std::array<QuadPoint, 6>{QuadPoint{{a1, a1, b1}, w1}, QuadPoint{{a1, b1, a1}, w1},
                                    QuadPoint{{b1, a1, a1}, w1}, QuadPoint{{a2, a2, b2}, w2},
                                    QuadPoint{{a2, b2, a2}, w2}, QuadPoint{{b2, a2, a2}, w2}};
  }();
  return rule;
}

struct TriangleGeometry {
  std::array<int, 3> v;
  std::array<Vec2, 3> p;
  double area;
  Eigen::Matrix<double, 3, 2> grad;
};

TriangleGeometry geometry_of(const TriMesh& mesh, int t) {
  TriangleGeometry g;
  for (int k = 0; k < 3; ++k) {
    g.v[k] = mesh.triangles()(t, k);
    g.p[k] = mesh.node(g.v[k]);
  }
  g.area = mesh.triangle_area(t);
  g.grad = p1_gradients(mesh, t);
  return g;
}

Vec2 at_bary(const TriangleGeometry& g, const std::array<double, 3>& b) {
  return b[0] * g.p[0] + b[1] * g.p[1] + b[2] * g.p[2];
}

const StateBundle& require_state(const ShapeProblem& problem, const StateBundle* state,
                                 const TriMesh& mesh) {
  if (!state || state->y.size() != mesh.num_nodes() || state->p.size() != mesh.num_nodes()) {
    throw InvalidArgument(to_string(problem.kind) + " needs a solved state and adjoint on this mesh");
  }
  return *state;
}

// int_Gamma <D_s V, v> ds, the derivative of the length.
double length_derivative(const DiscreteCurve& curve, const BoundaryVectorField& v) {
  const BoundaryVectorField dv = arc_length_derivative(v, curve);
  return dv.vectors.cwiseProduct(curve.tangent()).rowwise().sum().dot(curve.ds());
}

BoundaryVectorField gamma_trace(const TriMesh& mesh, const NodalVectorField& v) {
  const auto& loop = mesh.gamma_loop();
  PointArray out(static_cast<int>(loop.size()), 2);
  for (int i = 0; i < out.rows(); ++i) out.row(i) = v.row(loop[i]);
  return BoundaryVectorField(std::move(out));
}

// Per-node derivative along the polygon, from a second-order nonuniform central difference.
Eigen::VectorXd polygon_tangential_derivative(const PointArray& poly, const Eigen::VectorXd& f) {
  const int n = static_cast<int>(poly.rows());
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    const int a = (i + n - 1) % n;
    const int b = (i + 1) % n;
    const double h1 = (poly.row(i) - poly.row(a)).norm();
    const double h2 = (poly.row(b) - poly.row(i)).norm();
    out[i] = ((f[b] - f[i]) * h1 / h2 + (f[i] - f[a]) * h2 / h1) / (h1 + h2);
  }
  return out;
}

// Normal flux k d_n u on Gamma (outward from the inner region) by variational recovery:
// M_Gamma F = int_inside k grad u . grad phi_j - int_inside s phi_j.
Eigen::VectorXd recovered_flux(const TriMesh& mesh, const Eigen::VectorXd& coeff,
                               const Eigen::VectorXd& u,
                               const std::function<double(const TriangleGeometry&, int, int)>& source) {
  const auto& loop = mesh.gamma_loop();
  const int g = static_cast<int>(loop.size());
  Eigen::VectorXd residual = Eigen::VectorXd::Zero(g);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (!mesh.inside(t)) continue;
    const auto tri = mesh.triangles().row(t);
    if (mesh.gamma_index(tri(0)) < 0 && mesh.gamma_index(tri(1)) < 0 && mesh.gamma_index(tri(2)) < 0) {
      continue;
    }
    const TriangleGeometry geo = geometry_of(mesh, t);
    const Eigen::Vector2d grad_u =
        geo.grad.transpose() * Eigen::Vector3d(u[geo.v[0]], u[geo.v[1]], u[geo.v[2]]);
    for (int k = 0; k < 3; ++k) {
      const int j = mesh.gamma_index(geo.v[k]);
      if (j < 0) continue;
      residual[j] += coeff[t] * geo.area * grad_u.dot(geo.grad.row(k).transpose()) - source(geo, t, k);
    }
  }
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(g, g);
  for (int i = 0; i < g; ++i) {
    const int j = (i + 1) % g;
    const double len = (mesh.node(loop[j]) - mesh.node(loop[i])).norm();
    mass(i, i) += len / 3.0;
    mass(j, j) += len / 3.0;
    mass(i, j) += len / 6.0;
    mass(j, i) += len / 6.0;
  }
  return mass.llt().solve(residual);
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// TargetField

struct TargetField::Grid {
  PointArray nodes;
  TriangleArray triangles;
  Eigen::VectorXd values;
  std::vector<Eigen::Matrix<double, 3, 2>> grads;
  double x0 = 0, y0 = 0, cell = 1;
  int nx = 1, ny = 1;
  std::vector<std::vector<int>> buckets;

  int locate(const Vec2& x, Eigen::Vector3d& bary) const {
    const int ix = static_cast<int>(std::floor((x.x() - x0) / cell));
    const int iy = static_cast<int>(std::floor((x.y() - y0) / cell));
    if (ix < 0 || iy < 0 || ix >= nx || iy >= ny) return -1;
    for (int t : buckets[static_cast<std::size_t>(iy) * nx + ix]) {
      const Vec2 a = nodes.row(triangles(t, 0)).transpose();
      Eigen::Vector3d b;
      b[1] = grads[t](1, 0) * (x.x() - a.x()) + grads[t](1, 1) * (x.y() - a.y());
      b[2] = grads[t](2, 0) * (x.x() - a.x()) + grads[t](2, 1) * (x.y() - a.y());
      b[0] = 1.0 - b[1] - b[2];
      if (b.minCoeff() >= -1e-12) {
        bary = b;
        return t;
      }
    }
    return -1;
  }

  int nearest_node(const Vec2& x) const {
    Eigen::Index best = 0;
    (nodes.rowwise() - x.transpose()).rowwise().squaredNorm().minCoeff(&best);
    return static_cast<int>(best);
  }
};

TargetField::TargetField()
    : value_([](const Vec2&) { return 0.0; }), gradient_([](const Vec2&) { return Vec2::Zero().eval(); }) {}

TargetField TargetField::analytic(std::function<double(const Vec2&)> value,
                                  std::function<Vec2(const Vec2&)> gradient) {
  TargetField f;
  f.value_ = std::move(value);
  f.gradient_ = std::move(gradient);
  return f;
}

TargetField TargetField::nodal(const TriMesh& mesh, Eigen::VectorXd values) {
  if (values.size() != mesh.num_nodes()) throw InvalidArgument("target field needs one value per node");
  auto grid = std::make_shared<Grid>();
  grid->nodes = mesh.nodes();
  grid->triangles = mesh.triangles();
  grid->values = std::move(values);
  const int nt = mesh.num_triangles();
  grid->grads.resize(nt);
  for (int t = 0; t < nt; ++t) grid->grads[t] = p1_gradients(mesh, t);
  const Vec2 lo = mesh.nodes().colwise().minCoeff().transpose();
  const Vec2 hi = mesh.nodes().colwise().maxCoeff().transpose();
  const int per_side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(nt) / 2.0)));
  grid->cell = std::max(hi.x() - lo.x(), hi.y() - lo.y()) / per_side * (1.0 + 1e-9);
  grid->x0 = lo.x();
  grid->y0 = lo.y();
  grid->nx = static_cast<int>(std::floor((hi.x() - lo.x()) / grid->cell)) + 1;
  grid->ny = static_cast<int>(std::floor((hi.y() - lo.y()) / grid->cell)) + 1;
  grid->buckets.assign(static_cast<std::size_t>(grid->nx) * grid->ny, {});
  for (int t = 0; t < nt; ++t) {
    double bx0 = 1e300, by0 = 1e300, bx1 = -1e300, by1 = -1e300;
    for (int k = 0; k < 3; ++k) {
      const Vec2 p = mesh.node(mesh.triangles()(t, k));
      bx0 = std::min(bx0, p.x());
      by0 = std::min(by0, p.y());
      bx1 = std::max(bx1, p.x());
      by1 = std::max(by1, p.y());
    }
    const int i0 = std::max(0, static_cast<int>(std::floor((bx0 - grid->x0) / grid->cell)));
    const int i1 = std::min(grid->nx - 1, static_cast<int>(std::floor((bx1 - grid->x0) / grid->cell)));
    const int j0 = std::max(0, static_cast<int>(std::floor((by0 - grid->y0) / grid->cell)));
    const int j1 = std::min(grid->ny - 1, static_cast<int>(std::floor((by1 - grid->y0) / grid->cell)));
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) grid->buckets[static_cast<std::size_t>(j) * grid->nx + i].push_back(t);
    }
  }
  TargetField f;
  f.grid_ = grid;
  f.value_ = [grid](const Vec2& x) {
    Eigen::Vector3d b;
    const int t = grid->locate(x, b);
    if (t < 0) return grid->values[grid->nearest_node(x)];
    return b[0] * grid->values[grid->triangles(t, 0)] + b[1] * grid->values[grid->triangles(t, 1)] +
           b[2] * grid->values[grid->triangles(t, 2)];
  };
  f.gradient_ = [grid](const Vec2& x) -> Vec2 {
    Eigen::Vector3d b;
    const int t = grid->locate(x, b);
    if (t < 0) return Vec2::Zero();
    const Eigen::Vector3d local(grid->values[grid->triangles(t, 0)], grid->values[grid->triangles(t, 1)],
                                grid->values[grid->triangles(t, 2)]);
    return grid->grads[t].transpose() * local;
  };
  return f;
}

double TargetField::value(const Vec2& x) const { return value_(x); }
Vec2 TargetField::gradient(const Vec2& x) const { return gradient_(x); }

// ---------------------------------------------------------------------------------------------
// ShapeProblem

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::perimeter:
      return "perimeter";
    case ProblemKind::area_mismatch:
      return "area_mismatch";
    case ProblemKind::poisson_tracking:
      return "poisson_tracking";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  if (name == "perimeter") return ProblemKind::perimeter;
  if (name == "area_mismatch") return ProblemKind::area_mismatch;
  if (name == "poisson_tracking") return ProblemKind::poisson_tracking;
  throw InvalidArgument("unknown problem kind '" + name + "'");
}

ShapeProblem ShapeProblem::perimeter() { return ShapeProblem{}; }

ShapeProblem ShapeProblem::area_mismatch(double a_star, double nu) {
  ShapeProblem p;
  p.kind = ProblemKind::area_mismatch;
  p.a_star = a_star;
  p.nu = nu;
  p.validate();
  return p;
}

ShapeProblem ShapeProblem::poisson_tracking(double k_in, double k_out, double source,
                                            TargetField target, double nu) {
  ShapeProblem p;
  p.kind = ProblemKind::poisson_tracking;
  p.k_in = k_in;
  p.k_out = k_out;
  p.source = source;
  p.target = std::move(target);
  p.nu = nu;
  p.validate();
  return p;
}

void ShapeProblem::validate() const {
  if (!(nu >= 0.0)) throw InvalidArgument("regularization weight nu must be nonnegative");
  if (!(a_star >= 0.0)) throw InvalidArgument("target area must be nonnegative");
  if (!(k_in > 0.0) || !(k_out > 0.0)) throw InvalidArgument("diffusion coefficients must be positive");
  if (!std::isfinite(source)) throw InvalidArgument("source must be finite");
}

// ---------------------------------------------------------------------------------------------
// State and adjoint

Eigen::VectorXd region_coefficients(const ShapeProblem& problem, const TriMesh& mesh) {
  Eigen::VectorXd k(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) k[t] = mesh.inside(t) ? problem.k_in : problem.k_out;
  return k;
}

namespace {

Eigen::VectorXd state_load(const ShapeProblem& problem, const TriMesh& mesh, const SparseSpdOperator& op) {
  Eigen::VectorXd f = poisson_load(mesh, problem.source);
  for (int i = 0; i < op.dimension(); ++i) {
    if (op.is_constrained(i)) f[i] = 0.0;
  }
  return f;
}

}  // namespace

Eigen::VectorXd solve_state(const ShapeProblem& problem, const TriMesh& mesh) {
  if (problem.kind != ProblemKind::poisson_tracking) {
    throw InvalidArgument(to_string(problem.kind) + " has no state equation");
  }
  const SparseSpdOperator op = assemble_poisson(mesh, region_coefficients(problem, mesh));
  return solve_spd(op, state_load(problem, mesh, op), problem.cg);
}

StateBundle solve_state_adjoint(const ShapeProblem& problem, const TriMesh& mesh) {
  if (problem.kind != ProblemKind::poisson_tracking) {
    throw InvalidArgument(to_string(problem.kind) + " has no state equation");
  }
  const SparseSpdOperator op = assemble_poisson(mesh, region_coefficients(problem, mesh));
  StateBundle out;
  CgReport report;
  out.y = solve_spd(op, state_load(problem, mesh, op), problem.cg, &report);
  out.state_residual = report.relative_residual;

  Eigen::VectorXd g = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const TriangleGeometry geo = geometry_of(mesh, t);
    for (const QuadPoint& q : quadrature()) {
      const Vec2 x = at_bary(geo, q.bary);
      const double yq = q.bary[0] * out.y[geo.v[0]] + q.bary[1] * out.y[geo.v[1]] + q.bary[2] * out.y[geo.v[2]];
      const double e = q.weight * geo.area * (yq - problem.target.value(x));
      for (int k = 0; k < 3; ++k) g[geo.v[k]] += e * q.bary[k];
    }
  }
  for (int i = 0; i < op.dimension(); ++i) {
    if (op.is_constrained(i)) g[i] = 0.0;
  }
  out.p = solve_spd(op, g, problem.cg, &report);
  out.adjoint_residual = report.relative_residual;
  return out;
}

// ---------------------------------------------------------------------------------------------
// Evaluation

double evaluate(const ShapeProblem& problem, const DiscreteCurve& curve) {
  switch (problem.kind) {
    case ProblemKind::perimeter:
      return curve_length(curve);
    case ProblemKind::area_mismatch: {
      const double d = spectral_area(curve) - problem.a_star;
      return d * d + problem.nu * curve_length(curve);
    }
    case ProblemKind::poisson_tracking:
      break;
  }
  throw InvalidArgument("poisson_tracking needs a mesh to evaluate");
}

double tracking_term(const ShapeProblem& problem, const TriMesh& mesh, const Eigen::VectorXd& y) {
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const TriangleGeometry geo = geometry_of(mesh, t);
    double local = 0.0;
    for (const QuadPoint& q : quadrature()) {
      const double yq = q.bary[0] * y[geo.v[0]] + q.bary[1] * y[geo.v[1]] + q.bary[2] * y[geo.v[2]];
      const double e = yq - problem.target.value(at_bary(geo, q.bary));
      local += q.weight * e * e;
    }
    sum += 0.5 * geo.area * local;
  }
  return sum;
}

double evaluate(const ShapeProblem& problem, const TriMesh& mesh) {
  const DiscreteCurve curve = extract_gamma_curve(mesh);
  if (problem.kind != ProblemKind::poisson_tracking) return evaluate(problem, curve);
  const Eigen::VectorXd y = solve_state(problem, mesh);
  return tracking_term(problem, mesh, y) + problem.nu * curve_length(curve);
}

// ---------------------------------------------------------------------------------------------
// Derivatives

BoundaryScalarField surface_density(const ShapeProblem& problem, const DiscreteCurve& curve) {
  switch (problem.kind) {
    case ProblemKind::perimeter:
      return curvature(curve);
    case ProblemKind::area_mismatch: {
      const double jump = 2.0 * (spectral_area(curve) - problem.a_star);
      Eigen::VectorXd r = Eigen::VectorXd::Constant(curve.size(), jump);
      if (problem.nu != 0.0) r += problem.nu * curvature(curve).values;
      return BoundaryScalarField(std::move(r));
    }
    case ProblemKind::poisson_tracking:
      break;
  }
  throw InvalidArgument("poisson_tracking needs a mesh and state for its surface density");
}

BoundaryScalarField surface_density(const ShapeProblem& problem, const TriMesh& mesh,
                                    const StateBundle* state) {
  const DiscreteCurve curve = extract_gamma_curve(mesh);
  if (problem.kind != ProblemKind::poisson_tracking) return surface_density(problem, curve);
  const StateBundle& s = require_state(problem, state, mesh);
  const Eigen::VectorXd coeff = region_coefficients(problem, mesh);

  const double f = problem.source;
  const Eigen::VectorXd flux_y = recovered_flux(
      mesh, coeff, s.y, [f](const TriangleGeometry& g, int, int) { return f * g.area / 3.0; });
  const Eigen::VectorXd flux_p =
      recovered_flux(mesh, coeff, s.p, [&](const TriangleGeometry& g, int, int k) {
        double acc = 0.0;
        for (const QuadPoint& q : quadrature()) {
          const double yq = q.bary[0] * s.y[g.v[0]] + q.bary[1] * s.y[g.v[1]] + q.bary[2] * s.y[g.v[2]];
          acc += q.weight * q.bary[k] * (yq - problem.target.value(at_bary(g, q.bary)));
        }
        return g.area * acc;
      });

  const auto& loop = mesh.gamma_loop();
  const int n = static_cast<int>(loop.size());
  Eigen::VectorXd y_gamma(n), p_gamma(n);
  for (int i = 0; i < n; ++i) {
    y_gamma[i] = s.y[loop[i]];
    p_gamma[i] = s.p[loop[i]];
  }
  const Eigen::VectorXd ty = polygon_tangential_derivative(curve.points(), y_gamma);
  const Eigen::VectorXd tp = polygon_tangential_derivative(curve.points(), p_gamma);

  Eigen::VectorXd r = (problem.k_out - problem.k_in) * ty.cwiseProduct(tp) -
                      (1.0 / problem.k_out - 1.0 / problem.k_in) * flux_y.cwiseProduct(flux_p);
  if (problem.nu != 0.0) r += problem.nu * curvature(curve).values;
  return BoundaryScalarField(std::move(r));
}

double surface_derivative(const ShapeProblem& problem, const TriMesh& mesh, const StateBundle* state,
                          const NodalVectorField& v) {
  if (v.rows() != mesh.num_nodes()) throw InvalidArgument("test field has the wrong length");
  const DiscreteCurve curve = extract_gamma_curve(mesh);
  const BoundaryScalarField r = surface_density(problem, mesh, state);
  return l2_inner(r, normal_decompose(gamma_trace(mesh, v), curve).alpha, curve);
}

double volume_derivative(const ShapeProblem& problem, const TriMesh& mesh, const StateBundle* state,
                         const NodalVectorField& v) {
  if (v.rows() != mesh.num_nodes()) throw InvalidArgument("test field has the wrong length");
  const DiscreteCurve curve = extract_gamma_curve(mesh);
  const BoundaryVectorField trace = gamma_trace(mesh, v);

  if (problem.kind == ProblemKind::perimeter) return length_derivative(curve, trace);

  double regularization = problem.nu != 0.0 ? problem.nu * length_derivative(curve, trace) : 0.0;

  if (problem.kind == ProblemKind::area_mismatch) {
    double divergence = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      if (!mesh.inside(t)) continue;
      const TriangleGeometry geo = geometry_of(mesh, t);
      double div = 0.0;
      for (int k = 0; k < 3; ++k) div += v(geo.v[k], 0) * geo.grad(k, 0) + v(geo.v[k], 1) * geo.grad(k, 1);
      divergence += geo.area * div;
    }
    return 2.0 * (spectral_area(curve) - problem.a_star) * divergence + regularization;
  }

  const StateBundle& s = require_state(problem, state, mesh);
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles().row(t);
    if (v.row(tri(0)).isZero(0.0) && v.row(tri(1)).isZero(0.0) && v.row(tri(2)).isZero(0.0)) continue;
    const TriangleGeometry geo = geometry_of(mesh, t);
    Eigen::Matrix2d dv = Eigen::Matrix2d::Zero();  // dv(a, b) = d V_a / d x_b
    for (int k = 0; k < 3; ++k) dv += v.row(geo.v[k]).transpose() * geo.grad.row(k);
    const double div = dv.trace();
    const Eigen::Matrix2d a = div * Eigen::Matrix2d::Identity() - dv - dv.transpose();
    const Eigen::Vector3d yl(s.y[geo.v[0]], s.y[geo.v[1]], s.y[geo.v[2]]);
    const Eigen::Vector3d pl(s.p[geo.v[0]], s.p[geo.v[1]], s.p[geo.v[2]]);
    const Eigen::Vector2d gy = geo.grad.transpose() * yl;
    const Eigen::Vector2d gp = geo.grad.transpose() * pl;
    const double k = mesh.inside(t) ? problem.k_in : problem.k_out;

    double data = 0.0;
    for (const QuadPoint& q : quadrature()) {
      const Vec2 x = at_bary(geo, q.bary);
      const double yq = q.bary[0] * yl[0] + q.bary[1] * yl[1] + q.bary[2] * yl[2];
      const double e = yq - problem.target.value(x);
      Vec2 vq = Vec2::Zero();
      for (int j = 0; j < 3; ++j) vq += q.bary[j] * v.row(geo.v[j]).transpose();
      data += q.weight * (0.5 * e * e * div - e * problem.target.gradient(x).dot(vq));
    }
    total += geo.area * data;
    total -= k * geo.area * gy.dot(a * gp);
    total += problem.source * div * geo.area * pl.mean();
  }
  return total + regularization;
}

Eigen::VectorXd volume_gradient(const ShapeProblem& problem, const TriMesh& mesh,
                                const StateBundle* state) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * mesh.num_nodes());
  if (problem.kind == ProblemKind::perimeter) return g;

  if (problem.kind == ProblemKind::area_mismatch) {
    const double factor = 2.0 * (spectral_area(extract_gamma_curve(mesh)) - problem.a_star);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      if (!mesh.inside(t)) continue;
      const TriangleGeometry geo = geometry_of(mesh, t);
      for (int k = 0; k < 3; ++k) {
        for (int d = 0; d < 2; ++d) g[2 * geo.v[k] + d] += factor * geo.area * geo.grad(k, d);
      }
    }
    return g;
  }

  const StateBundle& s = require_state(problem, state, mesh);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const TriangleGeometry geo = geometry_of(mesh, t);
    const Eigen::Vector3d yl(s.y[geo.v[0]], s.y[geo.v[1]], s.y[geo.v[2]]);
    const Eigen::Vector3d pl(s.p[geo.v[0]], s.p[geo.v[1]], s.p[geo.v[2]]);
    const Eigen::Vector2d gy = geo.grad.transpose() * yl;
    const Eigen::Vector2d gp = geo.grad.transpose() * pl;
    const double kt = mesh.inside(t) ? problem.k_in : problem.k_out;

    // Quadrature data shared by all six basis fields of the triangle.
    std::array<double, 6> e{};
    std::array<Vec2, 6> target_grad{};
    for (std::size_t q = 0; q < quadrature().size(); ++q) {
      const QuadPoint& qp = quadrature()[q];
      const Vec2 x = at_bary(geo, qp.bary);
      e[q] = qp.bary[0] * yl[0] + qp.bary[1] * yl[1] + qp.bary[2] * yl[2] - problem.target.value(x);
      target_grad[q] = problem.target.gradient(x);
    }
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector2d gk = geo.grad.row(k).transpose();
      for (int d = 0; d < 2; ++d) {
        const double div = gk[d];
        // gy^T A gp with A = div I - DV - DV^T and DV = e_d gk^T.
        const double stiff = div * gy.dot(gp) - gy[d] * gk.dot(gp) - gk.dot(gy) * gp[d];
        double data = 0.0;
        for (std::size_t q = 0; q < quadrature().size(); ++q) {
          const QuadPoint& qp = quadrature()[q];
          data += qp.weight * (0.5 * e[q] * e[q] * div - e[q] * target_grad[q][d] * qp.bary[k]);
        }
        g[2 * geo.v[k] + d] +=
            geo.area * data - kt * geo.area * stiff + problem.source * div * geo.area * pl.mean();
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------------------------
// Finite-difference oracle

namespace {

FdEstimate richardson(const std::vector<double>& steps, const std::vector<double>& quotients) {
  FdEstimate out;
  out.steps = steps;
  out.quotients = quotients;
  const std::size_t m = steps.size();
  if (m == 1) {
    out.value = quotients[0];
    return out;
  }
  const double t0 = steps[m - 2];
  const double t1 = steps[m - 1];
  out.value = (quotients[m - 1] * t0 * t0 - quotients[m - 2] * t1 * t1) / (t0 * t0 - t1 * t1);
  if (m >= 3) {
    const double e0 = std::abs(quotients[m - 3] - quotients[m - 2]);
    const double e1 = std::abs(quotients[m - 2] - quotients[m - 1]);
    if (e0 > 0.0 && e1 > 0.0) out.observed_order = std::log(e0 / e1) / std::log(steps[m - 3] / steps[m - 2]);
  }
  return out;
}

template <class Eval>
FdEstimate central_differences(std::vector<double> steps, Eval&& eval) {
  if (steps.empty()) throw InvalidArgument("finite-difference oracle needs at least one step");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(steps[i] > 0.0) || (i > 0 && !(steps[i] < steps[i - 1]))) {
      throw InvalidArgument("finite-difference steps must be positive and decreasing");
    }
  }
  for (int attempt = 0; attempt < 12; ++attempt) {
    try {
      std::vector<double> quotients;
      for (double t : steps) quotients.push_back((eval(t) - eval(-t)) / (2.0 * t));
      return richardson(steps, quotients);
    } catch (const MeshError&) {
    } catch (const InvalidCurve&) {
    }
    for (double& t : steps) t *= 0.25;
  }
  throw InvalidArgument("finite-difference steps invalidate the geometry even after shrinking");
}

}  // namespace

FdEstimate eulerian_derivative_fd(const ShapeProblem& problem, const DiscreteCurve& curve,
                                  const BoundaryVectorField& v, const std::vector<double>& t_steps) {
  require_bound(v, curve);
  return central_differences(t_steps, [&](double t) { return evaluate(problem, displaced(curve, v, t)); });
}

FdEstimate eulerian_derivative_fd(const ShapeProblem& problem, const TriMesh& mesh,
                                  const NodalVectorField& v, const std::vector<double>& t_steps) {
  if (v.rows() != mesh.num_nodes()) throw InvalidArgument("test field has the wrong length");
  return central_differences(t_steps, [&](double t) { return evaluate(problem, apply_deformation(mesh, v, t)); });
}

BoundaryVectorField shape_hessian_apply(const ShapeProblem& problem, const DiscreteCurve& c,
                                        const BoundaryVectorField& h, const SobolevParams& p,
                                        double fd_step) {
  if (problem.needs_mesh()) {
    throw InvalidArgument("the shape Hessian is available for curve-evaluable problems only");
  }
  return shape_hessian_apply([&problem](const DiscreteCurve& curve) { return surface_density(problem, curve); },
                             c, h, p, fd_step);
}

}  // namespace shapeopt
