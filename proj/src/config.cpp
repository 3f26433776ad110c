#include "shapeopt/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const KeyValue& kv, const std::string& why) {
  throw ConfigError("line " + std::to_string(kv.line) + ": " + key + " = '" + kv.value + "': " + why,
                    kv.line);
}

double as_double(const std::string& key, const KeyValue& kv) {
  const char* s = kv.value.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0' || errno == ERANGE || !std::isfinite(v)) bad(key, kv, "expected a number");
  return v;
}

long long as_int(const std::string& key, const KeyValue& kv) {
  const char* s = kv.value.c_str();
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s, &end, 10);
  if (end == s || *end != '\0' || errno == ERANGE) bad(key, kv, "expected an integer");
  return v;
}

bool as_bool(const std::string& key, const KeyValue& kv) {
  if (kv.value == "true" || kv.value == "1" || kv.value == "yes") return true;
  if (kv.value == "false" || kv.value == "0" || kv.value == "no") return false;
  bad(key, kv, "expected true or false");
}

using Setter = std::function<void(RunConfig&, const std::string&, const KeyValue&)>;

Setter real(double RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const KeyValue& kv) { c.*field = as_double(k, kv); };
}

template <class Get>
Setter real_at(Get get) {
  return [get](RunConfig& c, const std::string& k, const KeyValue& kv) { get(c) = as_double(k, kv); };
}

template <class Get>
Setter integer_at(Get get) {
  return [get](RunConfig& c, const std::string& k, const KeyValue& kv) {
    get(c) = static_cast<int>(as_int(k, kv));
  };
}

template <class Get>
Setter text_at(Get get) {
  return [get](RunConfig& c, const std::string&, const KeyValue& kv) { get(c) = kv.value; };
}

void add_shape_keys(std::map<std::string, Setter>& t, const std::string& prefix,
                    ShapeSpec& (*get)(RunConfig&)) {
  t[prefix + "kind"] = text_at([get](RunConfig& c) -> std::string& { return get(c).kind; });
  t[prefix + "semi_x"] = real_at([get](RunConfig& c) -> double& { return get(c).semi_x; });
  t[prefix + "semi_y"] = real_at([get](RunConfig& c) -> double& { return get(c).semi_y; });
  t[prefix + "radius"] = [get](RunConfig& c, const std::string& k, const KeyValue& kv) {
    get(c).semi_x = get(c).semi_y = as_double(k, kv);
  };
  t[prefix + "center_x"] = real_at([get](RunConfig& c) -> double& { return get(c).center_x; });
  t[prefix + "center_y"] = real_at([get](RunConfig& c) -> double& { return get(c).center_y; });
  t[prefix + "samples"] = integer_at([get](RunConfig& c) -> int& { return get(c).samples; });
  t[prefix + "file"] = text_at([get](RunConfig& c) -> std::string& { return get(c).file; });
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["problem.kind"] = [](RunConfig& c, const std::string& k, const KeyValue& kv) {
      try {
        c.problem = problem_kind_from_string(kv.value);
      } catch (const InvalidArgument& e) {
        bad(k, kv, e.what());
      }
    };
    t["problem.a_star"] = real(&RunConfig::a_star);
    t["problem.nu"] = real(&RunConfig::nu);
    t["problem.k_in"] = real(&RunConfig::k_in);
    t["problem.k_out"] = real(&RunConfig::k_out);
    t["problem.source"] = real(&RunConfig::source);
    t["problem.target"] = text_at([](RunConfig& c) -> std::string& { return c.target.kind; });
    t["problem.target_file"] = text_at([](RunConfig& c) -> std::string& { return c.target.file; });
    t["problem.target_value"] = real_at([](RunConfig& c) -> double& { return c.target.value; });
    add_shape_keys(t, "problem.target_shape.", [](RunConfig& c) -> ShapeSpec& { return c.target.shape; });
    add_shape_keys(t, "shape.", [](RunConfig& c) -> ShapeSpec& { return c.shape; });

    t["mesh.h"] = real(&RunConfig::mesh_h);
    t["mesh.box"] = [](RunConfig& c, const std::string& k, const KeyValue& kv) {
      std::istringstream ss(kv.value);
      Box b;
      std::string extra;
      if (!(ss >> b.xmin >> b.ymin >> b.xmax >> b.ymax) || (ss >> extra)) {
        bad(k, kv, "expected four numbers xmin ymin xmax ymax");
      }
      c.box = b;
    };
    t["mesh.grading_rate"] = real_at([](RunConfig& c) -> double& { return c.grading.rate; });
    t["mesh.h_max"] = real_at([](RunConfig& c) -> double& { return c.grading.h_max; });

    t["optimizer.pipeline"] = [](RunConfig& c, const std::string& k, const KeyValue& kv) {
      try {
        c.optimizer.pipeline = pipeline_from_string(kv.value);
      } catch (const InvalidArgument& e) {
        bad(k, kv, e.what());
      }
    };
    t["optimizer.method"] = [](RunConfig& c, const std::string& k, const KeyValue& kv) {
      try {
        c.optimizer.method = method_from_string(kv.value);
      } catch (const InvalidArgument& e) {
        bad(k, kv, e.what());
      }
    };
    t["optimizer.memory"] = integer_at([](RunConfig& c) -> int& { return c.optimizer.memory; });
    t["optimizer.max_iter"] = integer_at([](RunConfig& c) -> int& { return c.optimizer.max_iter; });
    t["optimizer.grad_tol"] = real_at([](RunConfig& c) -> double& { return c.optimizer.grad_tol; });
    t["optimizer.grad_atol"] = real_at([](RunConfig& c) -> double& { return c.optimizer.grad_atol; });
    t["optimizer.c1"] = real_at([](RunConfig& c) -> double& { return c.optimizer.armijo.c1; });
    t["optimizer.rho"] = real_at([](RunConfig& c) -> double& { return c.optimizer.armijo.rho; });
    t["optimizer.step0"] = real_at([](RunConfig& c) -> double& { return c.optimizer.armijo.step0; });
    t["optimizer.max_backtracks"] =
        integer_at([](RunConfig& c) -> int& { return c.optimizer.armijo.max_backtracks; });
    t["optimizer.min_angle"] = real_at([](RunConfig& c) -> double& { return c.optimizer.min_angle_deg; });
    t["optimizer.max_displacement"] =
        real_at([](RunConfig& c) -> double& { return c.optimizer.max_displacement; });
    t["optimizer.flush_fraction"] =
        real_at([](RunConfig& c) -> double& { return c.optimizer.flush_fraction; });
    t["optimizer.redistribute"] = [](RunConfig& c, const std::string& k, const KeyValue& kv) {
      c.optimizer.redistribute = as_bool(k, kv);
    };
    t["optimizer.cg_tol"] = real_at([](RunConfig& c) -> double& { return c.optimizer.cg.rel_tol; });

    t["sobolev.A"] = real_at([](RunConfig& c) -> double& { return c.optimizer.sobolev.A; });
    t["hessian.fd_step"] = real(&RunConfig::hessian_fd_step);

    t["elasticity.lambda"] = real_at([](RunConfig& c) -> double& { return c.optimizer.elasticity.lambda; });
    t["elasticity.mu"] = real_at([](RunConfig& c) -> double& { return c.optimizer.elasticity.mu; });
    t["elasticity.stiffening"] = [](RunConfig& c, const std::string& k, const KeyValue& kv) {
      c.optimizer.elasticity.stiffening = as_bool(k, kv);
    };

    t["output.dir"] = text_at([](RunConfig& c) -> std::string& { return c.output_dir; });
    t["output.svg"] = [](RunConfig& c, const std::string& k, const KeyValue& kv) { c.write_svg = as_bool(k, kv); };
    t["run.seed"] = [](RunConfig& c, const std::string& k, const KeyValue& kv) {
      const long long v = as_int(k, kv);
      if (v < 0) bad(k, kv, "seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(v);
    };
    t["check.tolerance"] = real(&RunConfig::check_tolerance);
    t["check.fields"] = integer_at([](RunConfig& c) -> int& { return c.check_fields; });
    return t;
  }();
  return table;
}

void check_shape(const ShapeSpec& s, const std::string& prefix, const std::map<std::string, KeyValue>& kv) {
  auto line_of = [&](const std::string& key) {
    const auto it = kv.find(prefix + key);
    return it == kv.end() ? 0 : it->second.line;
  };
  auto fail = [&](const std::string& key, const std::string& why) {
    throw ConfigError("line " + std::to_string(line_of(key)) + ": " + prefix + key + ": " + why, line_of(key));
  };
  if (s.kind != "circle" && s.kind != "ellipse" && s.kind != "file") {
    fail("kind", "expected circle, ellipse or file");
  }
  if (s.kind == "file" && s.file.empty()) fail("file", "a file shape needs a path");
  if (s.kind != "file" && !(s.semi_x > 0.0 && s.semi_y > 0.0)) fail("semi_x", "semi-axes must be positive");
  if (s.samples < DiscreteCurve::kMinSamples) fail("samples", "at least 8 samples are needed");
}

}  // namespace

std::map<std::string, KeyValue> parse_key_values(std::istream& in) {
  std::map<std::string, KeyValue> out;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string text = trim(raw);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'", line);
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": empty key", line);
    if (value.empty()) throw ConfigError("line " + std::to_string(line) + ": " + key + " has no value", line);
    if (out.count(key)) {
      throw ConfigError("line " + std::to_string(line) + ": duplicate key " + key + " (first on line " +
                            std::to_string(out[key].line) + ")",
                        line);
    }
    out[key] = {value, line};
  }
  return out;
}

RunConfig parse_config(std::istream& in) {
  const auto kv = parse_key_values(in);
  RunConfig cfg;
  for (const auto& [key, entry] : kv) {
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError("line " + std::to_string(entry.line) + ": unknown key " + key, entry.line);
    }
    it->second(cfg, key, entry);
  }
  for (const char* required : {"problem.kind", "mesh.h"}) {
    if (!kv.count(required)) throw ConfigError(std::string("missing required key ") + required, 0);
  }

  auto line_of = [&](const std::string& key) {
    const auto it = kv.find(key);
    return it == kv.end() ? 0 : it->second.line;
  };
  auto require = [&](bool ok, const std::string& key, const std::string& why) {
    if (!ok) throw ConfigError("line " + std::to_string(line_of(key)) + ": " + key + ": " + why, line_of(key));
  };
  require(cfg.mesh_h > 0.0, "mesh.h", "must be positive");
  require(cfg.box.xmax > cfg.box.xmin && cfg.box.ymax > cfg.box.ymin, "mesh.box", "empty box");
  require(cfg.grading.rate >= 0.0, "mesh.grading_rate", "must be non-negative");
  require(cfg.nu >= 0.0, "problem.nu", "must be non-negative");
  require(cfg.k_in > 0.0, "problem.k_in", "must be positive");
  require(cfg.k_out > 0.0, "problem.k_out", "must be positive");
  require(cfg.a_star > 0.0, "problem.a_star", "must be positive");
  require(cfg.target.kind == "none" || cfg.target.kind == "constant" || cfg.target.kind == "shape" ||
              cfg.target.kind == "file",
          "problem.target", "expected none, constant, shape or file");
  require(cfg.target.kind != "file" || !cfg.target.file.empty(), "problem.target_file",
          "a file target needs a mesh file path");
  require(cfg.optimizer.memory >= 0, "optimizer.memory", "must be non-negative");
  require(cfg.optimizer.max_iter >= 0, "optimizer.max_iter", "must be non-negative");
  require(cfg.optimizer.grad_tol >= 0.0, "optimizer.grad_tol", "must be non-negative");
  require(cfg.optimizer.grad_atol >= 0.0, "optimizer.grad_atol", "must be non-negative");
  require(cfg.optimizer.armijo.c1 > 0.0 && cfg.optimizer.armijo.c1 < 1.0, "optimizer.c1", "must lie in (0, 1)");
  require(cfg.optimizer.armijo.rho > 0.0 && cfg.optimizer.armijo.rho < 1.0, "optimizer.rho", "must lie in (0, 1)");
  require(cfg.optimizer.armijo.step0 > 0.0, "optimizer.step0", "must be positive");
  require(cfg.optimizer.armijo.max_backtracks >= 0, "optimizer.max_backtracks", "must be non-negative");
  require(cfg.optimizer.min_angle_deg >= 0.0 && cfg.optimizer.min_angle_deg < 60.0, "optimizer.min_angle",
          "must lie in [0, 60)");
  require(cfg.optimizer.max_displacement > 0.0, "optimizer.max_displacement", "must be positive");
  require(cfg.optimizer.flush_fraction > 0.0, "optimizer.flush_fraction", "must be positive");
  require(cfg.optimizer.cg.rel_tol > 0.0, "optimizer.cg_tol", "must be positive");
  require(cfg.optimizer.sobolev.A > 0.0, "sobolev.A", "must be positive");
  require(cfg.hessian_fd_step > 0.0, "hessian.fd_step", "must be positive");
  require(cfg.optimizer.elasticity.mu > 0.0, "elasticity.mu", "must be positive");
  require(cfg.optimizer.elasticity.lambda >= 0.0, "elasticity.lambda", "must be non-negative");
  require(cfg.check_tolerance >= 0.0, "check.tolerance", "must be non-negative");
  require(cfg.check_fields >= 1, "check.fields", "must be at least 1");
  check_shape(cfg.shape, "shape.", kv);
  if (cfg.target.kind == "shape") check_shape(cfg.target.shape, "problem.target_shape.", kv);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path, 0);
  RunConfig cfg = parse_config(in);
  // Curve files are looked up next to the config.
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  for (std::string* f : {&cfg.shape.file, &cfg.target.shape.file, &cfg.target.file}) {
    if (!f->empty() && std::filesystem::path(*f).is_relative()) *f = (base / *f).string();
  }
  return cfg;
}

namespace {

void write_shape(std::ostream& out, const std::string& prefix, const ShapeSpec& s) {
  out << prefix << "kind = " << s.kind << '\n';
  out << prefix << "semi_x = " << s.semi_x << '\n';
  out << prefix << "semi_y = " << s.semi_y << '\n';
  out << prefix << "center_x = " << s.center_x << '\n';
  out << prefix << "center_y = " << s.center_y << '\n';
  out << prefix << "samples = " << s.samples << '\n';
  if (!s.file.empty()) out << prefix << "file = " << s.file << '\n';
}

}  // namespace

void write_config(std::ostream& out, const RunConfig& c) {
  out << std::setprecision(17);
  out << "problem.kind = " << to_string(c.problem) << '\n';
  out << "problem.a_star = " << c.a_star << '\n';
  out << "problem.nu = " << c.nu << '\n';
  out << "problem.k_in = " << c.k_in << '\n';
  out << "problem.k_out = " << c.k_out << '\n';
  out << "problem.source = " << c.source << '\n';
  out << "problem.target = " << c.target.kind << '\n';
  out << "problem.target_value = " << c.target.value << '\n';
  if (!c.target.file.empty()) out << "problem.target_file = " << c.target.file << '\n';
  write_shape(out, "problem.target_shape.", c.target.shape);
  write_shape(out, "shape.", c.shape);
  out << "mesh.h = " << c.mesh_h << '\n';
  out << "mesh.box = " << c.box.xmin << ' ' << c.box.ymin << ' ' << c.box.xmax << ' ' << c.box.ymax << '\n';
  out << "mesh.grading_rate = " << c.grading.rate << '\n';
  out << "mesh.h_max = " << c.grading.h_max << '\n';
  const OptimizerConfig& o = c.optimizer;
  out << "optimizer.pipeline = " << to_string(o.pipeline) << '\n';
  out << "optimizer.method = " << to_string(o.method) << '\n';
  out << "optimizer.memory = " << o.memory << '\n';
  out << "optimizer.max_iter = " << o.max_iter << '\n';
  out << "optimizer.grad_tol = " << o.grad_tol << '\n';
  out << "optimizer.grad_atol = " << o.grad_atol << '\n';
  out << "optimizer.c1 = " << o.armijo.c1 << '\n';
  out << "optimizer.rho = " << o.armijo.rho << '\n';
  out << "optimizer.step0 = " << o.armijo.step0 << '\n';
  out << "optimizer.max_backtracks = " << o.armijo.max_backtracks << '\n';
  out << "optimizer.min_angle = " << o.min_angle_deg << '\n';
  out << "optimizer.max_displacement = " << o.max_displacement << '\n';
  out << "optimizer.flush_fraction = " << o.flush_fraction << '\n';
  out << "optimizer.redistribute = " << (o.redistribute ? "true" : "false") << '\n';
  out << "optimizer.cg_tol = " << o.cg.rel_tol << '\n';
  out << "sobolev.A = " << o.sobolev.A << '\n';
  out << "hessian.fd_step = " << c.hessian_fd_step << '\n';
  out << "elasticity.lambda = " << o.elasticity.lambda << '\n';
  out << "elasticity.mu = " << o.elasticity.mu << '\n';
  out << "elasticity.stiffening = " << (o.elasticity.stiffening ? "true" : "false") << '\n';
  out << "output.dir = " << c.output_dir << '\n';
  out << "output.svg = " << (c.write_svg ? "true" : "false") << '\n';
  out << "run.seed = " << c.seed << '\n';
  out << "check.tolerance = " << c.check_tolerance << '\n';
  out << "check.fields = " << c.check_fields << '\n';
}

}  // namespace shapeopt
