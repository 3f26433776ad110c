// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "shapeopt/commands.hpp"
#include "shapeopt/config.hpp"
#include "shapeopt/optimizer.hpp"
#include "shapeopt/sobolev.hpp"
#include "shapeopt/steklov.hpp"
#include "shapeopt/validate.hpp"
#include "polygons.hpp"
#include "problems.hpp"
#include "support.hpp"

using namespace shapeopt;
namespace fs = std::filesystem;
using testsupport::kPi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// g1 from an independent dense D_s = diag(1/|c_theta|) D, summed over both components.
double dense_g1(const BoundaryVectorField& h, const BoundaryVectorField& k, const DiscreteCurve& c, double A) {
  const Eigen::MatrixXd ds = c.speed().cwiseInverse().asDiagonal() * spectral_differentiation_matrix(c.size());
  const Eigen::VectorXd w = c.ds();
  double sum = 0.0;
  for (int d = 0; d < 2; ++d) {
    const Eigen::VectorXd a = h.vectors.col(d), b = k.vectors.col(d);
    sum += a.cwiseProduct(b).dot(w) + A * (ds * a).cwiseProduct(ds * b).dot(w);
  }
  return sum;
}

TriMesh circle_mesh(double h, const Box& box = Box{}) {
  const int n = 8 * static_cast<int>(std::lround(2 * kPi / h / 8));
  return generate_annulus_mesh(box, DiscreteCurve::circle(n, 1.0), h);
}

bool nonincreasing(const std::vector<IterateRecord>& h) {
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i].J > h[i - 1].J) return false;
  }
  return true;
}

// Algebraic least-squares circle through the points, then the Hausdorff distance to a finely
// sampled copy of it.
double distance_to_best_fit_circle(const DiscreteCurve& c) {
  const int n = c.size();
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const Vec2 p = c.point(i);
    a.row(i) << p.x(), p.y(), 1.0;
    b[i] = -p.squaredNorm();
  }
  const Eigen::Vector3d s = a.colPivHouseholderQr().solve(b);
  const Vec2 center(-0.5 * s[0], -0.5 * s[1]);
  const double radius = std::sqrt(center.squaredNorm() - s[2]);
  return hausdorff_distance(c.points(), DiscreteCurve::circle(4096, radius, center).points());
}

std::optional<StateBundle> state_for(const ShapeProblem& p, const TriMesh& mesh) {
  if (!p.needs_mesh()) return std::nullopt;
  return solve_state_adjoint(p, mesh);
}

RunConfig shipped(const std::string& name) { return load_config(std::string(SHAPEOPT_CONFIGS) + "/" + name); }

// ---------------------------------------------------------------------------------------------

Outcome product_rule() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  const double A = 0.1;
  const SobolevParams p(A);
  double worst_closed = 0.0, worst_fd = 0.0;
  const int curves = 50;
  for (int t = 0; t < curves; ++t) {
    const DiscreteCurve c = testsupport::random_curve(rng, 128, 8);
    const BoundaryVectorField h = testsupport::random_vector(rng, 128, 8), k = testsupport::random_vector(rng, 128, 8),
                              m = testsupport::random_vector(rng, 128, 8);
    const double rhs = sobolev_inner(covariant_derivative(m, h, c, p), k, c, p) +
                       sobolev_inner(h, covariant_derivative(m, k, c, p), c, p);
    const double scale =
        std::sqrt(sobolev_inner(h, h, c, p) * sobolev_inner(k, k, c, p) * sobolev_inner(m, m, c, p));
    const double closed = metric_directional_derivative(h, k, m, c, p);
    auto central = [&](double eps) {
      return (dense_g1(h, k, displaced(c, m, eps), A) - dense_g1(h, k, displaced(c, m, -eps), A)) / (2 * eps);
    };
    const double eps = 1e-3;
    const double fd = (4 * central(eps / 2) - central(eps)) / 3;
    worst_closed = std::max(worst_closed, std::abs(closed - rhs) / scale);
    worst_fd = std::max(worst_fd, std::abs(fd - rhs) / scale);
  }
  const double secs = seconds_since(t0);
  return {worst_closed <= 1e-6 && worst_fd <= 1e-6 && secs < 10.0,
          std::to_string(curves) + " curves at N = 128: closed form " + sci(worst_closed) + ", FD " + sci(worst_fd) +
              " (limit 1e-6 |h||k||m|), " + fmt("%.1f", secs) + " s (limit 10 s)"};
}

Outcome riemannian_gradient_checks() {
  double worst_mode = 0.0;
  for (int n : {64, 128}) {
    for (double radius : {1.0, 0.6, 2.5}) {
      const DiscreteCurve c = DiscreteCurve::circle(n, radius);
      for (double A : {0.1, 1.0}) {
        const SobolevParams p(A);
        for (int k = 0; k < n / 2; ++k) {
          for (bool cosine : {true, false}) {
            if (k == 0 && !cosine) continue;
            Eigen::VectorXd m(n);
            for (int i = 0; i < n; ++i) {
              const double th = 2 * kPi * i / n;
              m[i] = cosine ? std::cos(k * th) : std::sin(k * th);
            }
            const BoundaryScalarField q = solve_L1(BoundaryScalarField(m), c, p);
            const double factor = 1.0 / (1.0 + A * k * k / (radius * radius));
            worst_mode = std::max(worst_mode, (q.values - factor * m).cwiseAbs().maxCoeff());
          }
        }
      }
    }
  }
  std::mt19937_64 rng(202);
  const SobolevParams p(0.1);
  double worst_riesz = 0.0;
  std::optional<DiscreteCurve> c;
  BoundaryScalarField r, q;
  for (int t = 0; t < 50; ++t) {
    if (t % 5 == 0) {
      c = testsupport::random_curve(rng, 128);
      r = testsupport::random_scalar(rng, 128);
      q = solve_L1(r, *c, p);
    }
    const BoundaryScalarField phi = testsupport::random_scalar(rng, 128);
    const double lhs = sobolev_inner(q, phi, *c, p), rhs = l2_inner(r, phi, *c);
    worst_riesz = std::max(worst_riesz, std::abs(lhs - rhs) / std::sqrt(l2_inner(r, r, *c) * l2_inner(phi, phi, *c)));
  }
  return {worst_mode <= 1e-10 && worst_riesz <= 1e-8,
          "Fourier modes " + sci(worst_mode) + " (limit 1e-10), Riesz on 50 fields " + sci(worst_riesz) +
              " (limit 1e-8)"};
}

Outcome derivative_consistency() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> hs{0.1, 0.05, 0.025};
  const std::vector<std::pair<std::string, ShapeProblem>> problems{
      {"perimeter", ShapeProblem::perimeter()},
      {"area_mismatch", ShapeProblem::area_mismatch(2.0)},
      {"poisson_tracking", testsupport::smooth_tracking()}};
  constexpr double kFloor = 1e-9;  // below this the three forms agree to FD resolution
  bool ok = true;
  std::string detail;
  for (const auto& [name, problem] : problems) {
    std::vector<std::vector<DerivativeRow>> levels;
    for (double h : hs) levels.push_back(derivative_table(problem, circle_mesh(h), 3, 0, 11));
    double worst_gap = 0.0, min_order = INFINITY;
    for (std::size_t f = 0; f < levels[0].size(); ++f) {
      std::vector<double> gaps;
      for (const auto& rows : levels) gaps.push_back(rows[f].discrepancy);
      worst_gap = std::max(worst_gap, gaps.back());
      if (gaps.back() <= kFloor) continue;
      // Least-squares slope of log gap against log h.
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t l = 0; l < hs.size(); ++l) {
        const double x = std::log(hs[l]), y = std::log(std::max(gaps[l], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      const double m = static_cast<double>(hs.size());
      min_order = std::min(min_order, (m * sxy - sx * sy) / (m * sxx - sx * sx));
    }
    const bool pass = worst_gap <= 1e-3 && (std::isinf(min_order) || min_order >= 1.0);
    ok = ok && pass;
    detail += name + " gap " + sci(worst_gap) + " order " +
              (std::isinf(min_order) ? std::string("n/a (at roundoff)") : fmt("%.2f", min_order)) + "; ";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 120.0;
  return {ok, detail + fmt("%.1f", secs) + " s (limit 120 s)"};
}

// Largest |FD| / |V| over tangential fields for each shipped functional, with the mesh (and any
// mesh-generated tracking data) at resolution h.
std::pair<double, std::string> tangential_worst(const DiscreteCurve& gamma, double h) {
  const Box box{};
  const TriMesh mesh = generate_annulus_mesh(box, gamma, h);
  RunConfig tracking_cfg = shipped("tracking_circle.cfg");
  tracking_cfg.box = box;
  tracking_cfg.mesh_h = h;
  const std::vector<std::pair<std::string, ShapeProblem>> problems{
      {"perimeter", ShapeProblem::perimeter()},
      {"area_mismatch", ShapeProblem::area_mismatch(2.0)},
      {"area_mismatch+nu", ShapeProblem::area_mismatch(kPi, 1e-3)},
      {"poisson_tracking", testsupport::smooth_tracking()},
      {"poisson_tracking+nu", testsupport::smooth_tracking(1e-3)},
      {"tracking_circle.cfg", build_problem(tracking_cfg)}};
  double worst = 0.0;
  std::string name;
  for (const auto& [pname, problem] : problems) {
    for (const DerivativeRow& r : derivative_table(problem, mesh, 0, 3, 13)) {
      if (r.discrepancy > worst) {
        worst = r.discrepancy;
        name = pname;
      }
    }
  }
  return {worst, name};
}

Outcome hadamard_structure(std::string& info) {
  std::string sweep;
  double finest = 0.0;
  for (double h : {0.1, 0.05, 0.025}) {
    const int n = 8 * static_cast<int>(std::lround(2 * kPi / h / 8));
    const auto [worst, name] = tangential_worst(DiscreteCurve::circle(n, 1.0), h);
    sweep += (sweep.empty() ? "" : ", ") + fmt("h %g: ", h) + sci(worst) + " (" + name + ")";
    finest = worst;
  }
  const auto [ellipse, ename] = tangential_worst(DiscreteCurve::ellipse(248, 1.3, 1.0), 0.025);
  info = "1.3 x 1 ellipse at h 0.025: max |FD| / |V| " + sci(ellipse) + " (" + ename + ")";
  return {finest <= 1e-5, "unit circle, 6 functionals x 3 tangential fields, max |FD| / |V| by resolution: " + sweep +
                              "; finest level limit 1e-5"};
}

Outcome steklov_identity() {
  const std::vector<std::pair<std::string, TriMesh>> meshes{
      {"circle", circle_mesh(0.1)},
      {"ellipse", generate_annulus_mesh(Box{-3, -3, 3, 3}, DiscreteCurve::ellipse(128, 2.0, 1.0), 0.1)}};
  const std::vector<std::pair<std::string, ShapeProblem>> problems{
      {"perimeter", ShapeProblem::perimeter()},
      {"area_mismatch", ShapeProblem::area_mismatch(2.0)},
      {"area_mismatch+nu", ShapeProblem::area_mismatch(kPi * 1.3, 1e-3)},
      {"poisson_tracking", testsupport::smooth_tracking()},
      {"poisson_tracking+nu", testsupport::smooth_tracking(1e-3)},
      {"tracking_circle.cfg", build_problem(shipped("tracking_circle.cfg"))}};
  CgOptions cg;
  cg.rel_tol = 1e-10;
  std::mt19937_64 rng(303);
  std::normal_distribution<double> g;
  double worst_identity = 0.0, worst_slope = -INFINITY;
  int far_nonzero = 0;
  std::string bad_slope;
  for (const auto& [mname, mesh] : meshes) {
    const std::vector<char> adjacent = gamma_adjacent_nodes(mesh);
    for (const auto& [pname, problem] : problems) {
      const auto s = state_for(problem, mesh);
      const DeformationSystem sys = assemble_deformation_system(mesh, problem, s ? &*s : nullptr, {}, cg);
      for (int i = 0; i < mesh.num_nodes(); ++i) {
        if ((!adjacent[i] || mesh.marks()[i] == kOuterNode) && (sys.rhs[2 * i] != 0.0 || sys.rhs[2 * i + 1] != 0.0)) {
          ++far_nonzero;
        }
      }
      const DeformationSolution sol = solve_deformation(sys);
      const Eigen::VectorXd u = flatten(sol.u);
      for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd v(sys.op.dimension());
        for (int i = 0; i < v.size(); ++i) v[i] = sys.op.is_constrained(i) ? 0.0 : g(rng);
        worst_identity =
            std::max(worst_identity, std::abs(sys.op.form(u, v) - sys.rhs.dot(v)) / (sys.rhs.norm() * v.norm()));
      }
      const NodalVectorField minus_u = -sol.u;
      const double slope = eulerian_derivative_fd(problem, mesh, minus_u).value;
      if (slope > worst_slope) worst_slope = slope;
      if (!(slope < 0.0)) bad_slope += " " + pname + " on " + mname;
    }
  }
  return {worst_identity <= 1e-10 && far_nonzero == 0 && bad_slope.empty(),
          "a(U,V) - b(V) " + sci(worst_identity) + " (limit 1e-10 |b||V|), nonzero rhs entries away from Gamma " +
              std::to_string(far_nonzero) + ", largest FD slope along -U " + sci(worst_slope) +
              (bad_slope.empty() ? "" : ", not descending:" + bad_slope)};
}

struct BenchmarkRun {
  OptimizationResult result;
  DiscreteCurve gamma;
  double area = 0.0;
  double seconds = 0.0;
};

BenchmarkRun run_config(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const ShapeProblem problem = build_problem(cfg);
  const TriMesh mesh = build_mesh(cfg, build_shape(cfg.shape));
  OptimizerConfig ocfg = cfg.optimizer;
  ocfg.keep_snapshots = false;
  OptimizationResult r = optimize(problem, mesh, ocfg);
  DiscreteCurve gamma = extract_gamma_curve(r.mesh);
  const double area = spectral_area(gamma);
  return {std::move(r), std::move(gamma), area, seconds_since(t0)};
}

// Area benchmark conditions shared by both pipelines.
Outcome area_benchmark(const RunConfig& cfg) {
  const BenchmarkRun b = run_config(cfg);
  const double dist = distance_to_best_fit_circle(b.gamma);
  const int iters = b.result.history.back().iter;
  const bool mono = nonincreasing(b.result.history);
  const bool pass = b.result.converged && iters <= 200 && std::abs(b.area - kPi) <= 1e-3 &&
                    dist <= 2 * cfg.mesh_h && mono;
  return {pass, "nu = " + fmt("%g", cfg.nu) + ": " + b.result.stop_reason + " after " + std::to_string(iters) +
                    " iterations, |area - pi| " + sci(std::abs(b.area - kPi)) + " (limit 1e-3), best-fit circle distance " +
                    fmt("%.4f", dist) + " (limit " + fmt("%g", 2 * cfg.mesh_h) + "), J " +
                    (mono ? "monotone" : "NOT monotone") + ", " + fmt("%.1f", b.seconds) + " s"};
}

Outcome sobolev_pipeline(std::string& info) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = shipped("area_circle.cfg");
  cfg.optimizer.pipeline = Pipeline::sobolev;
  cfg.nu = 0.0;
  const Outcome literal = area_benchmark(cfg);
  const double secs = seconds_since(t0);
  cfg.nu = 1e-3;
  info = "regularized variant, " + area_benchmark(cfg).detail;
  return {literal.pass && secs < 300.0, literal.detail + " (limit 300 s)"};
}

Outcome steklov_pipeline(std::string& info) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig area = shipped("area_circle_steklov.cfg");
  area.optimizer.pipeline = Pipeline::steklov;
  area.nu = 0.0;
  const Outcome literal = area_benchmark(area);

  const RunConfig tcfg = shipped("tracking_circle.cfg");
  const BenchmarkRun t = run_config(tcfg);
  const double j0 = t.result.history.front().J, j1 = t.result.history.back().J;
  const double reduction = 1.0 - j1 / j0;
  const DiscreteCurve target = build_shape(tcfg.target.shape);
  const double dist = hausdorff_distance(t.gamma.points(), target.points());
  const bool mono = nonincreasing(t.result.history);
  const bool tracking_pass = tcfg.nu == 0.0 && reduction >= 0.9 && dist <= 2 * tcfg.mesh_h && mono;
  const double secs = seconds_since(t0);

  area.nu = 1e-3;
  info = "regularized variant, " + area_benchmark(area).detail;
  return {literal.pass && tracking_pass && secs < 600.0,
          "area " + literal.detail + "; tracking " + sci(j0) + " -> " + sci(j1) + " (reduction " +
              fmt("%.2f", 100 * reduction) + "%, limit 90%), distance to target " + fmt("%.4f", dist) + " (limit " +
              fmt("%g", 2 * tcfg.mesh_h) + "), J " + (mono ? "monotone" : "NOT monotone") + " in " +
              std::to_string(t.result.history.back().iter) + " iterations; total " + fmt("%.1f", secs) +
              " s (limit 600 s)"};
}

Outcome lbfgs_sanity() {
  bool bitwise = true;
  std::string where;
  for (const char* name : {"area_circle.cfg", "area_circle_steklov.cfg", "tracking_circle.cfg"}) {
    const RunConfig cfg = shipped(name);
    const ShapeProblem problem = build_problem(cfg);
    const TriMesh mesh = build_mesh(cfg, build_shape(cfg.shape));
    OptimizerConfig sd = cfg.optimizer, lb = cfg.optimizer;
    sd.method = Method::steepest;
    lb.method = Method::lbfgs;
    lb.memory = 0;
    sd.max_iter = lb.max_iter = 1;
    sd.keep_snapshots = lb.keep_snapshots = false;
    const OptimizationResult a = optimize(problem, mesh, sd), b = optimize(problem, mesh, lb);
    bool same = a.history.size() == b.history.size() && a.mesh.nodes() == b.mesh.nodes();
    for (std::size_t k = 0; same && k < a.history.size(); ++k) {
      same = a.history[k].J == b.history[k].J && a.history[k].grad_norm == b.history[k].grad_norm &&
             a.history[k].step == b.history[k].step;
    }
    if (!same) where += std::string(" ") + name;
    bitwise = bitwise && same && a.history.size() == 2;
  }

  // Quadratic J(alpha) = 1/2 alpha^T H alpha on a fixed circle; its g1 Hessian operator is G^-1 H.
  const int n = 16;
  const DiscreteCurve c = DiscreteCurve::circle(n, 1.0);
  const SobolevParams p(0.1);
  Eigen::MatrixXd gm(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      gm(i, j) = sobolev_inner(BoundaryScalarField(Eigen::VectorXd::Unit(n, i)),
                               BoundaryScalarField(Eigen::VectorXd::Unit(n, j)), c, p);
    }
  }
  const InnerProduct inner = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return sobolev_inner(BoundaryScalarField(a), BoundaryScalarField(b), c, p);
  };
  std::mt19937_64 rng(404);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  }
  const Eigen::MatrixXd h = m * m.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd op = gm.ldlt().solve(h);
  LbfgsMemory mem(n);
  std::vector<Eigen::VectorXd> steps;
  bool kept = true;
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd s(n);
    for (double& x : s) x = g(rng);
    for (const Eigen::VectorXd& t : steps) s -= (t.dot(h * s) / t.dot(h * t)) * t;
    steps.push_back(s);
    kept = mem.push(s, op * s, inner) && kept;
  }
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd alpha(n);
    for (double& x : alpha) x = g(rng);
    const Eigen::VectorXd dir = mem.apply(op * alpha, inner);
    worst = std::max(worst, (dir - alpha).norm() / alpha.norm());
  }
  return {bitwise && kept && worst <= 1e-6,
          std::string("memory 0 vs steepest first iterate ") + (bitwise ? "bitwise identical" : "DIFFERS:" + where) +
              " on 3 benchmark configs; dense 16-dim inverse-Hessian direction " + sci(worst) + " (limit 1e-6)"};
}

Outcome predicates() {
  std::mt19937_64 rng(505);
  int mismatches = 0, simple = 0;
  for (int t = 0; t < 1000; ++t) {
    const PointArray p = testsupport::random_polygon(rng, DiscreteCurve::kMinSamples, 64);
    const auto oracle = testsupport::oracle_crossings(p);
    const bool expect = oracle.empty() && !testsupport::has_repeated_vertex(p);
    const ValidationReport rep = validate_shape(p);
    if (rep.injective != expect || edge_crossings(p) != edge_crossings_bruteforce(p) ||
        edge_crossings_bruteforce(p) != oracle) {
      ++mismatches;
    }
    simple += expect;
  }
  int invariance_failures = 0;
  for (int t = 0; t < 50; ++t) {
    const DiscreteCurve c = testsupport::random_curve(rng, 96);
    const DiscreteCurve rotated(testsupport::rotate_index(c.points(), 1 + t % 95));
    const DiscreteCurve reversed(PointArray(c.points().colwise().reverse()));
    const DiscreteCurve fine = resample(c, 211);
    const double edge = (c.points() - testsupport::rotate_index(c.points(), 1)).rowwise().norm().maxCoeff();
    for (bool ok : {shapes_equivalent(c, rotated, 1e-12), shapes_equivalent(rotated, c, 1e-12),
                    shapes_equivalent(c, reversed, 1e-12), shapes_equivalent(reversed, c, 1e-12),
                    shapes_equivalent(c, fine, edge), shapes_equivalent(fine, c, edge)}) {
      invariance_failures += !ok;
    }
  }
  double worst_circle = 0.0;
  for (int n : {16, 64, 256, 1024}) {
    for (auto [r1, r2] : {std::pair{1.0, 1.1}, std::pair{0.5, 2.0}}) {
      const double d = hausdorff_distance(DiscreteCurve::circle(n, r1).points(), DiscreteCurve::circle(n, r2).points());
      worst_circle = std::max(worst_circle, std::abs(d - (r2 - r1)));
    }
  }
  return {mismatches == 0 && invariance_failures == 0 && worst_circle <= 1e-9,
          "brute-force disagreements " + std::to_string(mismatches) + " of 1000 (" + std::to_string(simple) +
              " simple), equivalence invariance failures " + std::to_string(invariance_failures) +
              " of 300, concentric-circle error " + sci(worst_circle) + " (limit 1e-9)"};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "shapeopt_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cfg = std::string(SHAPEOPT_CONFIGS) + "/area_circle.cfg";
  std::vector<std::string> histories;
  std::vector<int> codes;
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("\"") + SHAPEOPT_CLI + "\" run \"" + cfg + "\" --seed 12345 --output \"" +
                            (dir / run).string() + "\" > \"" + (dir / (std::string(run) + ".log")).string() + "\" 2>&1";
    codes.push_back(std::system(cmd.c_str()));
    std::ifstream f(dir / run / "history.csv", std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    histories.push_back(ss.str());
  }
  const bool same = !histories[0].empty() && histories[0] == histories[1];
  return {same && codes[0] == 0 && codes[1] == 0,
          "two CLI runs of area_circle.cfg with seed 12345: history.csv " +
              std::string(same ? "bitwise identical" : "DIFFERS") + " (" + std::to_string(histories[0].size()) +
              " bytes), exit statuses " + std::to_string(codes[0]) + "/" + std::to_string(codes[1])};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome(std::string&)> run;
  };
  auto plain = [](Outcome (*f)()) { return [f](std::string&) { return f(); }; };
  const std::vector<Criterion> criteria{
      {1, "product rule of the g1 connection", plain(product_rule)},
      {2, "Riemannian gradient", plain(riemannian_gradient_checks)},
      {3, "derivative consistency", plain(derivative_consistency)},
      {4, "Hadamard structure", hadamard_structure},
      {5, "Steklov identity", plain(steklov_identity)},
      {6, "Sobolev pipeline benchmark", sobolev_pipeline},
      {7, "Steklov pipeline benchmarks", steklov_pipeline},
      {8, "L-BFGS sanity", plain(lbfgs_sanity)},
      {9, "shape predicates", plain(predicates)},
      {10, "determinism", plain(determinism)},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    std::string info;
    Outcome o;
    try {
      o = c.run(info);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << std::endl;
    if (!info.empty()) std::cout << "     info [" << c.id << "] " << info << std::endl;
  }
  std::cout << (criteria.size() - failures) << " of " << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
