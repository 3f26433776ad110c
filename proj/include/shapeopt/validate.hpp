#pragma once

#include <string>
#include <utility>
#include <vector>

#include "shapeopt/curve.hpp"

namespace shapeopt {

struct ValidationReport {
  bool valid = false;
  bool injective = false;
  /// Vertex-angle heuristic: no vertex sharper than kMinVertexAngle.
  bool lipschitz = false;
  double min_vertex_angle = 0.0;  ///< radians
  std::vector<std::pair<int, int>> crossings;  ///< intersecting edge pairs (edge i runs i -> i+1)
  std::string reason;
};

inline constexpr double kMinVertexAngle = 1e-3;

/// Checks the closed polygon through the samples. Injectivity uses exact predicates.
ValidationReport validate_shape(const PointArray& points);
ValidationReport validate_shape(const DiscreteCurve& c);

/// Intersecting pairs of non-adjacent edges, plus adjacent edges that fold back on each other.
/// Grid-bucketed; `limit` stops the search early (0 = all).
std::vector<std::pair<int, int>> edge_crossings(const PointArray& points, std::size_t limit = 0);
/// All-pairs reference version of the same test.
std::vector<std::pair<int, int>> edge_crossings_bruteforce(const PointArray& points);

/// Smallest interior angle between consecutive edges at any vertex, in radians.
double min_vertex_angle(const PointArray& points);

/// Hausdorff distance between two closed polylines, computed by branch and bound over the
/// segment parameters to an absolute accuracy of 1e-12 times the extent of the data.
double hausdorff_distance(const PointArray& a, const PointArray& b);

bool shapes_equivalent(const DiscreteCurve& a, const DiscreteCurve& b, double tol);

}  // namespace shapeopt
