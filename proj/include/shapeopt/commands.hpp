#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "shapeopt/config.hpp"
#include "shapeopt/optimizer.hpp"

namespace shapeopt {

struct CommandOptions {
  bool dry_run = false;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
};

/// Exit codes: 0 converged, 2 stopped without convergence, 1 on any error.
int cmd_run(const std::string& config_path, const CommandOptions& opts, std::ostream& out,
            std::ostream& err);
/// 0 iff every row of the derivative table is within check.tolerance.
int cmd_check_derivative(const std::string& config_path, const CommandOptions& opts,
                         std::ostream& out, std::ostream& err);
/// 0 iff the curve is valid (and, with a second curve and a tolerance, equivalent to it).
int cmd_validate(const std::string& curve_path, const std::optional<std::string>& other_path,
                 std::optional<double> equiv_tol, std::ostream& out, std::ostream& err);
int cmd_mesh_info(const std::string& config_path, const CommandOptions& opts, std::ostream& out,
                  std::ostream& err);

DiscreteCurve build_shape(const ShapeSpec& spec);
/// Builds the problem, including the target state on the target shape when configured.
ShapeProblem build_problem(const RunConfig& cfg);
TriMesh build_mesh(const RunConfig& cfg, const DiscreteCurve& curve);

/// One row of the derivative consistency table.
struct DerivativeRow {
  std::string field;
  bool tangential = false;
  double surface = 0.0;
  double volume = 0.0;
  double fd = 0.0;
  double fd_order = 0.0;
  double field_norm = 0.0;  ///< max nodal |V|
  /// Largest pairwise relative gap (normal rows) or |FD| / |V| (tangential rows).
  double discrepancy = 0.0;
};

/// Smooth random test field on the mesh, zero on the outer boundary.
NodalVectorField random_smooth_field(const TriMesh& mesh, const Box& box, std::mt19937_64& rng);
/// Random tangential data on Gamma extended into the mesh by elasticity.
NodalVectorField random_tangential_field(const TriMesh& mesh, std::mt19937_64& rng);

std::vector<DerivativeRow> derivative_table(const ShapeProblem& problem, const TriMesh& mesh,
                                            int normal_fields, int tangential_fields,
                                            std::uint64_t seed);

/// Relative gap |a - b| / max(|a|, |b|), 0 when both vanish.
double relative_gap(double a, double b);

void write_history_csv(std::ostream& out, const std::vector<IterateRecord>& history);
std::vector<IterateRecord> read_history_csv(std::istream& in);
/// Curve snapshots as polylines in a self-contained SVG document.
void write_snapshots_svg(std::ostream& out, const std::vector<DiscreteCurve>& snapshots, const Box& box);

}  // namespace shapeopt
