#include "shapeopt/optimizer.hpp"

#include <cmath>
#include <cstdio>

#include "shapeopt/errors.hpp"
#include "shapeopt/steklov.hpp"
#include "shapeopt/validate.hpp"

namespace shapeopt {

std::string to_string(Pipeline p) { return p == Pipeline::sobolev ? "sobolev_surface" : "steklov_volume"; }
std::string to_string(Method m) { return m == Method::steepest ? "steepest" : "lbfgs"; }

Pipeline pipeline_from_string(const std::string& s) {
  if (s == "sobolev_surface" || s == "sobolev") return Pipeline::sobolev;
  if (s == "steklov_volume" || s == "steklov") return Pipeline::steklov;
  throw InvalidArgument("unknown pipeline '" + s + "' (expected sobolev_surface or steklov_volume)");
}

Method method_from_string(const std::string& s) {
  if (s == "steepest") return Method::steepest;
  if (s == "lbfgs") return Method::lbfgs;
  throw InvalidArgument("unknown method '" + s + "' (expected steepest or lbfgs)");
}

LbfgsMemory::LbfgsMemory(int capacity) : capacity_(capacity) {
  if (capacity < 0) throw InvalidArgument("L-BFGS memory must be non-negative");
}

bool LbfgsMemory::push(const Eigen::VectorXd& s, const Eigen::VectorXd& y, const InnerProduct& inner) {
  if (capacity_ == 0) return false;
  const double ys = inner(y, s);
  const double yy = inner(y, y), ss = inner(s, s);
  if (!(ys > 1e-12 * std::sqrt(yy * ss))) return false;
  pairs_.push_back({s, y, 1.0 / ys});
  while (static_cast<int>(pairs_.size()) > capacity_) pairs_.pop_front();
  return true;
}

Eigen::VectorXd LbfgsMemory::apply(const Eigen::VectorXd& grad, const InnerProduct& inner) const {
  if (pairs_.empty()) return grad;
  Eigen::VectorXd q = grad;
  std::vector<double> alpha(pairs_.size());
  for (int i = static_cast<int>(pairs_.size()) - 1; i >= 0; --i) {
    alpha[i] = pairs_[i].rho * inner(pairs_[i].s, q);
    q -= alpha[i] * pairs_[i].y;
  }
  const CurvaturePair& last = pairs_.back();
  Eigen::VectorXd r = (1.0 / (last.rho * inner(last.y, last.y))) * q;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const double beta = pairs_[i].rho * inner(pairs_[i].y, r);
    r += (alpha[i] - beta) * pairs_[i].s;
  }
  return r;
}

ArmijoResult armijo_search(const std::function<std::optional<double>(double)>& trial, double j0,
                           double slope, const ArmijoConfig& cfg) {
  if (!(slope < 0.0)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "not a descent direction (slope %.3e)", slope);
    throw LineSearchError(buf);
  }
  if (!(cfg.c1 > 0.0 && cfg.c1 < 1.0 && cfg.rho > 0.0 && cfg.rho < 1.0 && cfg.step0 > 0.0)) {
    throw InvalidArgument("Armijo parameters need 0 < c1 < 1, 0 < rho < 1 and step0 > 0");
  }
  ArmijoResult out;
  double t = cfg.step0;
  for (int k = 0; k <= cfg.max_backtracks; ++k) {
    const std::optional<double> value = trial(t);
    if (!value) {
      ++out.rejected;
    } else if (*value <= j0 + cfg.c1 * t * slope) {
      out.step = t;
      out.value = *value;
      out.backtracks = k;
      return out;
    }
    t *= cfg.rho;
  }
  throw LineSearchError("no acceptable step after " + std::to_string(cfg.max_backtracks) +
                        " backtracks");
}

ArmijoResult armijo_search(const ShapeProblem& problem, const DiscreteCurve& curve,
                           const BoundaryVectorField& direction, const ArmijoConfig& cfg) {
  if (problem.needs_mesh()) throw InvalidArgument("curve-level line search needs a curve-evaluable problem");
  const BoundaryScalarField r = surface_density(problem, curve);
  const double slope = l2_inner(r, normal_decompose(direction, curve).alpha, curve);
  const double j0 = evaluate(problem, curve);
  return armijo_search(
      [&](double t) -> std::optional<double> {
        try {
          const DiscreteCurve moved = displaced(curve, direction, t);
          if (!validate_shape(moved).valid) return std::nullopt;
          return evaluate(problem, moved);
        } catch (const InvalidCurve&) {
          return std::nullopt;
        }
      },
      j0, slope, cfg);
}

NodalVectorField extend_boundary_field(const TriMesh& mesh, const BoundaryVectorField& values,
                                       const ElasticityParams& elasticity, const CgOptions& cg) {
  const auto& loop = mesh.gamma_loop();
  if (values.size() != static_cast<int>(loop.size())) {
    throw InvalidArgument("boundary field does not match the interface loop");
  }
  const SparseSpdOperator op = assemble_elasticity(mesh, elasticity);
  std::vector<char> fixed(op.dimension(), 0);
  Eigen::VectorXd prescribed = Eigen::VectorXd::Zero(op.dimension());
  for (std::size_t i = 0; i < loop.size(); ++i) {
    for (int d = 0; d < 2; ++d) {
      fixed[2 * loop[i] + d] = 1;
      prescribed[2 * loop[i] + d] = values.vectors(static_cast<int>(i), d);
    }
  }
  return unflatten(
      solve_spd_prescribed(op, Eigen::VectorXd::Zero(op.dimension()), fixed, prescribed, cg));
}

BoundaryVectorField redistribution_field(const DiscreteCurve& c, const BoundaryScalarField& alpha) {
  require_bound(alpha, c);
  const Eigen::VectorXd ka = curvature(c).values.cwiseProduct(alpha.values);
  const Eigen::VectorXd ds = c.ds();
  const double mean = ka.dot(ds) / ds.sum();
  const Eigen::VectorXd rate = (Eigen::VectorXd::Constant(c.size(), mean) - ka).cwiseProduct(c.speed());
  const Eigen::VectorXd tau = periodic_antiderivative(rate);
  PointArray v = c.tangent();
  v.array().colwise() *= tau.array();
  return BoundaryVectorField(std::move(v));
}

NodalVectorField extend_normal_field(const TriMesh& mesh, const DiscreteCurve& gamma,
                                     const BoundaryScalarField& alpha,
                                     const ElasticityParams& elasticity, const CgOptions& cg) {
  return extend_boundary_field(mesh, normal_field(alpha, gamma), elasticity, cg);
}

namespace {

// Everything the loop needs at one iterate.
struct Iterate {
  TriMesh mesh;
  DiscreteCurve curve;
  double J = 0.0;
  Eigen::VectorXd grad;       // q on Gamma (sobolev) or flattened U (steklov)
  Eigen::VectorXd density;    // r on Gamma (sobolev) or assembled b (steklov)
  std::optional<SparseSpdOperator> op;
  double grad_norm = 0.0;
};

double functional_value(const ShapeProblem& problem, const TriMesh& mesh, const DiscreteCurve& curve,
                        const StateBundle* state) {
  if (state) {
    double j = tracking_term(problem, mesh, state->y);
    if (problem.nu != 0.0) j += problem.nu * curve_length(curve);
    return j;
  }
  return evaluate(problem, mesh);
}

Iterate make_iterate(const ShapeProblem& problem, TriMesh mesh, const OptimizerConfig& cfg) {
  DiscreteCurve curve = extract_gamma_curve(mesh);
  std::optional<StateBundle> state;
  if (problem.needs_mesh()) state = solve_state_adjoint(problem, mesh);
  const StateBundle* sp = state ? &*state : nullptr;
  Iterate it{std::move(mesh), std::move(curve), 0.0, {}, {}, std::nullopt, 0.0};
  it.J = functional_value(problem, it.mesh, it.curve, sp);

  if (cfg.pipeline == Pipeline::sobolev) {
    const BoundaryScalarField r = surface_density(problem, it.mesh, sp);
    const BoundaryScalarField q = solve_L1(r, it.curve, cfg.sobolev);
    it.density = r.values;
    it.grad = q.values;
    it.grad_norm = std::sqrt(std::max(0.0, sobolev_inner(q, q, it.curve, cfg.sobolev)));
  } else {
    DeformationSystem sys = assemble_deformation_system(it.mesh, problem, sp, cfg.elasticity, cfg.cg);
    it.grad = solve_spd(sys.op, sys.rhs, sys.cg);
    it.density = std::move(sys.rhs);
    it.op.emplace(std::move(sys.op));
    it.grad_norm = std::sqrt(std::max(0.0, it.op->form(it.grad, it.grad)));
  }
  return it;
}

InnerProduct metric_of(const Iterate& it, const OptimizerConfig& cfg) {
  if (cfg.pipeline == Pipeline::sobolev) {
    return [&it, &cfg](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      return sobolev_inner(BoundaryScalarField(a), BoundaryScalarField(b), it.curve, cfg.sobolev);
    };
  }
  return [&it](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return it.op->form(a, b); };
}

double directional_slope(const Iterate& it, const Eigen::VectorXd& dir, const OptimizerConfig& cfg) {
  if (cfg.pipeline == Pipeline::sobolev) {
    return l2_inner(BoundaryScalarField(it.density), BoundaryScalarField(dir), it.curve);
  }
  return it.density.dot(dir);
}

double gamma_max_displacement(const TriMesh& mesh, const NodalVectorField& u) {
  double m = 0.0;
  for (int node : mesh.gamma_loop()) m = std::max(m, u.row(node).norm());
  return m;
}

}  // namespace

OptimizationResult optimize(const ShapeProblem& problem, const TriMesh& initial,
                            const OptimizerConfig& cfg) {
  problem.validate();
  if (cfg.max_iter < 0) throw InvalidArgument("max_iter must be non-negative");
  if (!initial.has_gamma()) throw MeshError("optimization needs a mesh with an interface loop");
  LbfgsMemory memory(cfg.method == Method::lbfgs ? cfg.memory : 0);

  OptimizationResult result;
  Iterate it = make_iterate(problem, initial, cfg);
  const double grad0 = it.grad_norm;
  double moved_since_flush = 0.0;
  std::optional<Eigen::VectorXd> last_step;
  Eigen::VectorXd last_grad;

  for (int k = 0;; ++k) {
    if (last_step) {
      memory.push(*last_step, it.grad - last_grad, metric_of(it, cfg));
      last_step.reset();
    }
    IterateRecord rec{k, it.J, it.grad_norm, 0.0, min_angle_deg(it.mesh), 0};
    if (cfg.keep_snapshots) result.snapshots.push_back(it.curve);

    auto finish = [&](bool converged, std::string reason) {
      result.history.push_back(rec);
      if (cfg.on_iterate) cfg.on_iterate(rec, it.mesh);
      result.converged = converged;
      result.stop_reason = std::move(reason);
      result.mesh = it.mesh;
      return result;
    };
    if (it.grad_norm <= cfg.grad_atol) return finish(true, "gradient norm below absolute tolerance");
    if (k > 0 && it.grad_norm <= cfg.grad_tol * grad0) {
      return finish(true, "gradient norm reduced below relative tolerance");
    }
    if (k >= cfg.max_iter) return finish(false, "iteration limit reached");

    const InnerProduct inner = metric_of(it, cfg);
    Eigen::VectorXd dir = -memory.apply(it.grad, inner);
    double slope = directional_slope(it, dir, cfg);
    if (!(slope < 0.0) && memory.size() > 0) {
      memory.clear();
      dir = -it.grad;
      slope = directional_slope(it, dir, cfg);
    }

    std::optional<ArmijoResult> accepted;
    std::optional<TriMesh> accepted_mesh;
    NodalVectorField motion;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (cfg.pipeline == Pipeline::sobolev) {
        const BoundaryScalarField alpha(dir);
        BoundaryVectorField data = normal_field(alpha, it.curve);
        if (cfg.redistribute) data.vectors += redistribution_field(it.curve, alpha).vectors;
        motion = extend_boundary_field(it.mesh, data, cfg.elasticity, cfg.cg);
      } else {
        motion = unflatten(dir);
      }
      const double reach = gamma_max_displacement(it.mesh, motion);
      ArmijoConfig ac = cfg.armijo;
      if (reach > 0.0) ac.step0 = std::min(ac.step0, cfg.max_displacement / reach);
      auto trial = [&](double t) -> std::optional<double> {
        try {
          TriMesh moved = apply_deformation(it.mesh, motion, t);
          if (min_angle_deg(moved) < cfg.min_angle_deg) return std::nullopt;
          const DiscreteCurve c = extract_gamma_curve(moved);
          if (c.was_reversed() || !validate_shape(c).valid) return std::nullopt;
          const double j = evaluate(problem, moved);
          accepted_mesh = std::move(moved);
          return j;
        } catch (const TangledMeshError&) {
          return std::nullopt;
        } catch (const InvalidCurve&) {
          return std::nullopt;
        }
      };
      try {
        accepted = armijo_search(trial, it.J, slope, ac);
      } catch (const LineSearchError& e) {
        if (memory.size() == 0 || attempt == 1) return finish(false, std::string("line search failed: ") + e.what());
        memory.clear();
        dir = -it.grad;
        slope = directional_slope(it, dir, cfg);
      }
    }

    rec.step = accepted->step;
    rec.backtracks = accepted->backtracks;
    result.history.push_back(rec);
    if (cfg.on_iterate) cfg.on_iterate(rec, it.mesh);

    moved_since_flush += accepted->step * gamma_max_displacement(it.mesh, motion);
    const double length = curve_length(it.curve);
    last_grad = it.grad;
    last_step = accepted->step * dir;
    // armijo_search only returns after the accepting trial, so accepted_mesh is that trial.
    it = make_iterate(problem, std::move(*accepted_mesh), cfg);
    if (moved_since_flush > cfg.flush_fraction * length) {
      memory.clear();
      last_step.reset();
      moved_since_flush = 0.0;
    }
  }
}

}  // namespace shapeopt
