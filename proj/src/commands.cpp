#include "shapeopt/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "shapeopt/curve_io.hpp"
#include "shapeopt/errors.hpp"
#include "shapeopt/mesh_io.hpp"
#include "shapeopt/validate.hpp"

namespace shapeopt {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

RunConfig load_with_overrides(const std::string& path, const CommandOptions& opts) {
  RunConfig cfg = load_config(path);
  if (opts.output_dir) cfg.output_dir = *opts.output_dir;
  if (opts.seed) cfg.seed = *opts.seed;
  return cfg;
}

std::string snapshot_name(int iter) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "curve_%04d.txt", iter);
  return buf;
}

}  // namespace

DiscreteCurve build_shape(const ShapeSpec& spec) {
  const Vec2 center(spec.center_x, spec.center_y);
  if (spec.kind == "circle") return DiscreteCurve::circle(spec.samples, spec.semi_x, center);
  if (spec.kind == "ellipse") return DiscreteCurve::ellipse(spec.samples, spec.semi_x, spec.semi_y, center);
  if (spec.kind == "file") return read_curve_file(spec.file);
  throw InvalidArgument("unknown shape kind '" + spec.kind + "'");
}

TriMesh build_mesh(const RunConfig& cfg, const DiscreteCurve& curve) {
  return generate_annulus_mesh(cfg.box, curve, cfg.mesh_h, cfg.grading);
}

ShapeProblem build_problem(const RunConfig& cfg) {
  ShapeProblem p;
  switch (cfg.problem) {
    case ProblemKind::perimeter:
      p = ShapeProblem::perimeter();
      break;
    case ProblemKind::area_mismatch:
      p = ShapeProblem::area_mismatch(cfg.a_star, cfg.nu);
      break;
    case ProblemKind::poisson_tracking: {
      TargetField target;
      if (cfg.target.kind == "constant") {
        const double v = cfg.target.value;
        target = TargetField::analytic([v](const Vec2&) { return v; }, [](const Vec2&) { return Vec2::Zero().eval(); });
      } else if (cfg.target.kind == "shape") {
        ShapeProblem reference = ShapeProblem::poisson_tracking(cfg.k_in, cfg.k_out, cfg.source, TargetField());
        reference.cg = cfg.optimizer.cg;
        const TriMesh mesh = build_mesh(cfg, build_shape(cfg.target.shape));
        target = TargetField::nodal(mesh, solve_state(reference, mesh));
      } else if (cfg.target.kind == "file") {
        std::ifstream in(cfg.target.file);
        if (!in) throw Error("cannot read target file " + cfg.target.file);
        MeshFields fields;
        const TriMesh mesh = read_mesh(in, &fields);
        const auto it = fields.scalars.find("target");
        if (it == fields.scalars.end()) throw Error(cfg.target.file + " has no scalar field 'target'");
        target = TargetField::nodal(mesh, it->second);
      }
      p = ShapeProblem::poisson_tracking(cfg.k_in, cfg.k_out, cfg.source, std::move(target), cfg.nu);
      break;
    }
  }
  p.cg = cfg.optimizer.cg;
  p.validate();
  return p;
}

double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0.0) return 0.0;
  return std::abs(a - b) / scale;
}

NodalVectorField random_smooth_field(const TriMesh& mesh, const Box& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::array<std::array<double, 6>, 2> a{};
  for (auto& comp : a) {
    for (double& c : comp) c = coef(rng);
  }
  const double w = box.xmax - box.xmin, h = box.ymax - box.ymin;
  NodalVectorField v(mesh.num_nodes(), 2);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const Vec2 x = mesh.node(i);
    const double bubble = 16.0 * (x.x() - box.xmin) * (box.xmax - x.x()) * (x.y() - box.ymin) *
                          (box.ymax - x.y()) / (w * w * h * h);
    const double xi = 2.0 * (x.x() - box.xmin) / w - 1.0, eta = 2.0 * (x.y() - box.ymin) / h - 1.0;
    for (int d = 0; d < 2; ++d) {
      const auto& c = a[d];
      v(i, d) = bubble * (c[0] + c[1] * xi + c[2] * eta + c[3] * xi * eta +
                          c[4] * std::cos(std::numbers::pi * xi) + c[5] * std::sin(std::numbers::pi * eta));
    }
  }
  return v;
}

NodalVectorField random_tangential_field(const TriMesh& mesh, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const DiscreteCurve curve = extract_gamma_curve(mesh);
  const int n = curve.size();
  std::array<double, 7> b{};
  for (double& c : b) c = coef(rng);
  PointArray values(n, 2);
  for (int i = 0; i < n; ++i) {
    const double th = curve.parameter_step() * i;
    double phi = b[0];
    for (int k = 1; k <= 3; ++k) phi += b[2 * k - 1] * std::cos(k * th) + b[2 * k] * std::sin(k * th);
    values.row(i) = phi * curve.tangent().row(i);
  }
  return extend_boundary_field(mesh, BoundaryVectorField(std::move(values)), ElasticityParams{}, CgOptions{});
}

std::vector<DerivativeRow> derivative_table(const ShapeProblem& problem, const TriMesh& mesh,
                                            int normal_fields, int tangential_fields,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::optional<StateBundle> state;
  if (problem.needs_mesh()) state = solve_state_adjoint(problem, mesh);
  const StateBundle* sp = state ? &*state : nullptr;

  // Field bounds come from the mesh nodes, which for generated meshes span the box.
  const Eigen::Vector2d lo = mesh.nodes().colwise().minCoeff().transpose();
  const Eigen::Vector2d hi = mesh.nodes().colwise().maxCoeff().transpose();
  const Box box{lo.x(), lo.y(), hi.x(), hi.y()};

  std::vector<DerivativeRow> rows;
  auto add = [&](NodalVectorField v, std::string name, bool tangential) {
    DerivativeRow r;
    r.field = std::move(name);
    r.tangential = tangential;
    r.surface = surface_derivative(problem, mesh, sp, v);
    r.volume = volume_derivative(problem, mesh, sp, v);
    const FdEstimate fd = eulerian_derivative_fd(problem, mesh, v);
    r.fd = fd.value;
    r.fd_order = fd.observed_order;
    r.field_norm = v.rowwise().norm().maxCoeff();
    if (tangential) {
      r.discrepancy = std::abs(r.fd) / std::max(r.field_norm, 1e-300);
    } else {
      r.discrepancy = std::max({relative_gap(r.surface, r.volume), relative_gap(r.surface, r.fd),
                                relative_gap(r.volume, r.fd)});
    }
    rows.push_back(r);
  };
  for (int k = 0; k < normal_fields; ++k) add(random_smooth_field(mesh, box, rng), "random_" + std::to_string(k), false);
  for (int k = 0; k < tangential_fields; ++k) {
    add(random_tangential_field(mesh, rng), "tangential_" + std::to_string(k), true);
  }
  return rows;
}

void write_history_csv(std::ostream& out, const std::vector<IterateRecord>& history) {
  out << "iter,J,grad_norm,step,mesh_min_angle\n";
  char buf[200];
  for (const IterateRecord& r : history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.iter, r.J, r.grad_norm, r.step,
                  r.mesh_min_angle);
    out << buf;
  }
}

std::vector<IterateRecord> read_history_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "iter,J,grad_norm,step,mesh_min_angle") {
    throw InvalidArgument("history file lacks the expected header");
  }
  std::vector<IterateRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    IterateRecord r;
    std::string extra;
    if (!(ss >> r.iter >> r.J >> r.grad_norm >> r.step >> r.mesh_min_angle) || (ss >> extra)) {
      throw InvalidArgument("history line " + std::to_string(lineno) + " is malformed");
    }
    out.push_back(r);
  }
  return out;
}

void write_snapshots_svg(std::ostream& out, const std::vector<DiscreteCurve>& snapshots, const Box& box) {
  const double scale = 400.0 / std::max(box.xmax - box.xmin, box.ymax - box.ymin);
  const double w = (box.xmax - box.xmin) * scale, h = (box.ymax - box.ymin) * scale;
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\" stroke=\"black\"/>\n";
  const std::size_t count = snapshots.size();
  const std::size_t stride = std::max<std::size_t>(1, count / 20);
  for (std::size_t k = 0; k < count; ++k) {
    const bool last = k + 1 == count;
    if (k % stride != 0 && !last) continue;
    out << "<polygon fill=\"none\" stroke=\"" << (last ? "#c00000" : "#4060a0") << "\" stroke-opacity=\""
        << (last ? 1.0 : 0.4) << "\" stroke-width=\"" << (last ? 2 : 1) << "\" points=\"";
    const PointArray& p = snapshots[k].points();
    for (int i = 0; i < p.rows(); ++i) {
      out << (p(i, 0) - box.xmin) * scale << ',' << (box.ymax - p(i, 1)) * scale << ' ';
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

int cmd_run(const std::string& config_path, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  int last_iter = -1;
  try {
    const RunConfig cfg = load_with_overrides(config_path, opts);
    const ShapeProblem problem = build_problem(cfg);
    const DiscreteCurve curve = build_shape(cfg.shape);
    const TriMesh mesh = build_mesh(cfg, curve);
    if (opts.dry_run) {
      out << "config ok: " << to_string(cfg.problem) << ", " << to_string(cfg.optimizer.pipeline) << '/'
          << to_string(cfg.optimizer.method) << ", mesh " << mesh.num_nodes() << " nodes, "
          << mesh.num_triangles() << " triangles, min angle " << fmt("%.2f", min_angle_deg(mesh)) << " deg\n";
      return 0;
    }

    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    OptimizerConfig ocfg = cfg.optimizer;
    ocfg.on_iterate = [&](const IterateRecord& r, const TriMesh&) {
      last_iter = r.iter;
      char buf[160];
      std::snprintf(buf, sizeof buf, "iter %4d  J %.10e  |grad| %.3e  step %.3e  angle %.1f\n", r.iter, r.J,
                    r.grad_norm, r.step, r.mesh_min_angle);
      out << buf;
    };
    const auto start = std::chrono::steady_clock::now();
    const OptimizationResult result = optimize(problem, mesh, ocfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    {
      std::ofstream f(dir / "history.csv");
      write_history_csv(f, result.history);
    }
    for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
      write_curve_file((dir / snapshot_name(static_cast<int>(k))).string(), result.snapshots[k]);
    }
    MeshFields fields;
    if (problem.needs_mesh()) fields.scalars["state"] = solve_state(problem, result.mesh);
    write_vtk_file((dir / "final.vtk").string(), result.mesh, fields);
    if (cfg.write_svg) {
      std::ofstream f(dir / "snapshots.svg");
      write_snapshots_svg(f, result.snapshots, cfg.box);
    }
    const IterateRecord& last = result.history.back();
    {
      std::ofstream f(dir / "summary.txt");
      f << std::setprecision(17);
      f << "problem = " << to_string(cfg.problem) << '\n';
      f << "pipeline = " << to_string(cfg.optimizer.pipeline) << '\n';
      f << "method = " << to_string(cfg.optimizer.method) << '\n';
      f << "final_J = " << last.J << '\n';
      f << "grad_norm = " << last.grad_norm << '\n';
      f << "iterations = " << last.iter << '\n';
      f << "area = " << spectral_area(extract_gamma_curve(result.mesh)) << '\n';
      f << "converged = " << (result.converged ? "true" : "false") << '\n';
      f << "stop_reason = " << result.stop_reason << '\n';
      f << "seed = " << cfg.seed << '\n';
      f << "wall_time = " << wall << '\n';
    }
    out << result.stop_reason << " after " << last.iter << " iterations; output in " << dir.string() << '\n';
    return result.converged ? 0 : 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    if (last_iter >= 0) {
      err << "error after iteration " << last_iter << ": " << e.what() << '\n';
    } else {
      err << "error: " << e.what() << '\n';
    }
  }
  return 1;
}

int cmd_check_derivative(const std::string& config_path, const CommandOptions& opts, std::ostream& out,
                         std::ostream& err) {
  try {
    const RunConfig cfg = load_with_overrides(config_path, opts);
    const ShapeProblem problem = build_problem(cfg);
    const TriMesh mesh = build_mesh(cfg, build_shape(cfg.shape));
    if (opts.dry_run) {
      out << "config ok\n";
      return 0;
    }
    const std::vector<DerivativeRow> rows = derivative_table(problem, mesh, cfg.check_fields, 2, cfg.seed);
    constexpr double kTangentialLimit = 1e-5;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-14s %17s %17s %17s %8s %11s %s\n", "field", "surface", "volume", "fd",
                  "order", "gap", "status");
    out << buf;
    bool ok = true;
    const DerivativeRow* worst = nullptr;
    double worst_ratio = -1.0;
    for (const DerivativeRow& r : rows) {
      const double limit = r.tangential ? std::min(kTangentialLimit, std::max(cfg.check_tolerance, 0.0))
                                        : cfg.check_tolerance;
      const bool pass = r.discrepancy <= limit;
      ok = ok && pass;
      const double ratio = limit > 0.0 ? r.discrepancy / limit : (r.discrepancy > 0.0 ? INFINITY : 0.0);
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        worst = &r;
      }
      std::snprintf(buf, sizeof buf, "%-14s %17.10e %17.10e %17.10e %8.3f %11.3e %s\n", r.field.c_str(), r.surface,
                    r.volume, r.fd, r.fd_order, r.discrepancy, pass ? "ok" : "FAIL");
      out << buf;
    }
    if (!ok && worst) {
      out << "worst offender: " << worst->field << " (gap " << fmt("%.3e", worst->discrepancy) << ")\n";
    }
    out << (ok ? "derivative check passed\n" : "derivative check failed\n");
    return ok ? 0 : 1;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

int cmd_validate(const std::string& curve_path, const std::optional<std::string>& other_path,
                 std::optional<double> equiv_tol, std::ostream& out, std::ostream& err) {
  try {
    if (equiv_tol && !other_path) throw InvalidArgument("--equiv needs a second curve file");
    auto report_for = [&](const std::string& path, bool& valid) {
      const DiscreteCurve c = read_curve_file(path);
      const ValidationReport r = validate_shape(c);
      out << path << ": " << (r.valid ? "valid" : "invalid") << ", injective " << (r.injective ? "yes" : "no")
          << ", min vertex angle " << fmt("%.4g", r.min_vertex_angle) << " rad";
      if (!r.reason.empty()) out << " (" << r.reason << ")";
      out << '\n';
      for (const auto& [i, j] : r.crossings) out << "  crossing: edges " << i << " and " << j << '\n';
      valid = valid && r.valid;
      return c;
    };
    bool valid = true;
    const DiscreteCurve a = report_for(curve_path, valid);
    bool equivalent = true;
    if (other_path) {
      const DiscreteCurve b = report_for(*other_path, valid);
      const double d = hausdorff_distance(a.points(), b.points());
      out << "hausdorff distance " << fmt("%.12g", d) << '\n';
      if (equiv_tol) {
        equivalent = d <= *equiv_tol;
        out << (equivalent ? "equivalent" : "not equivalent") << " at tolerance " << fmt("%.6g", *equiv_tol) << '\n';
      }
    }
    return valid && equivalent ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

int cmd_mesh_info(const std::string& config_path, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = load_with_overrides(config_path, opts);
    const DiscreteCurve curve = build_shape(cfg.shape);
    const TriMesh mesh = build_mesh(cfg, curve);
    double inner_area = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      if (mesh.inside(t)) inner_area += mesh.triangle_area(t);
    }
    out << "nodes " << mesh.num_nodes() << '\n';
    out << "triangles " << mesh.num_triangles() << '\n';
    out << "interface nodes " << mesh.gamma_loop().size() << '\n';
    out << "min angle " << fmt("%.3f", min_angle_deg(mesh)) << " deg\n";
    out << "min triangle area " << fmt("%.3e", min_triangle_area(mesh)) << '\n';
    out << "max edge length " << fmt("%.4f", max_edge_length(mesh)) << '\n';
    out << "inner region area " << fmt("%.10f", inner_area) << " (curve " << fmt("%.10f", spectral_area(curve))
        << ")\n";
    if (opts.output_dir && !opts.dry_run) {
      const fs::path dir(*opts.output_dir);
      fs::create_directories(dir);
      std::ofstream f(dir / "mesh.txt");
      write_mesh(f, mesh);
      write_vtk_file((dir / "mesh.vtk").string(), mesh);
      out << "wrote " << (dir / "mesh.txt").string() << '\n';
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace shapeopt
