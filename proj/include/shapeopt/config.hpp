#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "shapeopt/functionals.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/optimizer.hpp"

namespace shapeopt {

/// circle, ellipse, or a curve file.
struct ShapeSpec {
  std::string kind = "ellipse";
  double semi_x = 1.0;
  double semi_y = 1.0;
  double center_x = 0.0;
  double center_y = 0.0;
  int samples = 128;
  std::string file;
};

/// Tracking target: none (ybar = 0), constant, the state computed on a target shape, or the
/// scalar field "target" of a mesh file.
struct TargetSpec {
  std::string kind = "none";
  double value = 0.0;
  ShapeSpec shape;
  std::string file;
};

/// Parsed run configuration. Text format: one `section.key = value` per line, `#` comments.
struct RunConfig {
  ProblemKind problem = ProblemKind::perimeter;
  double a_star = std::numbers::pi;
  double nu = 0.0;
  double k_in = 1.0;
  double k_out = 1.0;
  double source = 1.0;
  TargetSpec target;

  ShapeSpec shape;

  Box box;
  double mesh_h = 0.1;
  MeshGrading grading;

  OptimizerConfig optimizer;
  double hessian_fd_step = 1e-5;

  std::string output_dir = "output";
  bool write_svg = false;
  std::uint64_t seed = 0;

  double check_tolerance = 1e-3;
  int check_fields = 4;
};

/// Raw `key = value` pairs with the line each came from.
struct KeyValue {
  std::string value;
  int line = 0;
};
std::map<std::string, KeyValue> parse_key_values(std::istream& in);

/// Throws ConfigError naming the line for syntax errors, unknown keys, bad values, and missing
/// required keys (problem.kind, mesh.h).
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Writes every key, so that parse_config(write_config(c)) reproduces c.
void write_config(std::ostream& out, const RunConfig& cfg);

}  // namespace shapeopt
