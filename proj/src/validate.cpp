#include "shapeopt/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "shapeopt/errors.hpp"
#include "shapeopt/predicates.hpp"

namespace shapeopt {

namespace {

Vec2 pt(const PointArray& p, int i) { return p.row(i).transpose(); }

// Adjacent edges i and i+1 share a vertex; they overlap beyond it only when collinear and
// pointing back.
bool folds_back(const PointArray& p, int i) {
  const int n = static_cast<int>(p.rows());
  const Vec2 a = pt(p, i), b = pt(p, (i + 1) % n), c = pt(p, (i + 2) % n);
  return orient2d(a, b, c) == 0 && (a - b).dot(c - b) > 0.0;
}

bool edges_cross(const PointArray& p, int i, int j) {
  const int n = static_cast<int>(p.rows());
  return segments_intersect(pt(p, i), pt(p, (i + 1) % n), pt(p, j), pt(p, (j + 1) % n));
}

bool adjacent(int i, int j, int n) { return (i + 1) % n == j || (j + 1) % n == i; }

double point_segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (x - a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (x - (a + t * d)).norm();
}

// sup over the polyline a of the distance to b, to absolute accuracy tol.
//
// Along a segment of a, the distance to each single segment of b is convex, so on an interval
// it peaks at an endpoint; the minimum over segments of those endpoint maxima bounds the
// distance to b from above. Intervals are bisected until that bound meets the best value seen.
double directed_hausdorff(const PointArray& a, const PointArray& b, double tol) {
  struct Interval {
    int seg;
    double t0, t1, upper;
    bool operator<(const Interval& o) const { return upper < o.upper; }
  };
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(b.rows());
  auto at = [&](int seg, double t) { return Vec2((1.0 - t) * pt(a, seg) + t * pt(a, (seg + 1) % n)); };

  double best = 0.0;
  std::priority_queue<Interval> queue;
  auto push = [&](int seg, double t0, double t1) {
    const Vec2 x0 = at(seg, t0), x1 = at(seg, t1);
    double d0 = std::numeric_limits<double>::infinity(), d1 = d0, upper = d0;
    for (int j = 0; j < m; ++j) {
      const Vec2 p = pt(b, j), q = pt(b, (j + 1) % m);
      const double f0 = point_segment_distance(x0, p, q), f1 = point_segment_distance(x1, p, q);
      d0 = std::min(d0, f0);
      d1 = std::min(d1, f1);
      upper = std::min(upper, std::max(f0, f1));
    }
    best = std::max({best, d0, d1});
    if (upper > best + tol) queue.push({seg, t0, t1, upper});
  };
  for (int i = 0; i < n; ++i) push(i, 0.0, 1.0);

  while (!queue.empty()) {
    const Interval iv = queue.top();
    queue.pop();
    if (iv.upper <= best + tol) break;
    const double tm = 0.5 * (iv.t0 + iv.t1);
    if (!(tm > iv.t0 && tm < iv.t1)) continue;  // interval exhausted at double resolution
    push(iv.seg, iv.t0, tm);
    push(iv.seg, tm, iv.t1);
  }
  return best;
}

}  // namespace

std::vector<std::pair<int, int>> edge_crossings_bruteforce(const PointArray& points) {
  const int n = static_cast<int>(points.rows());
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i) {
    if (folds_back(points, i)) out.emplace_back(i, (i + 1) % n);
    for (int j = i + 1; j < n; ++j) {
      if (adjacent(i, j, n)) continue;
      if (edges_cross(points, i, j)) out.emplace_back(i, j);
    }
  }
  for (auto& [i, j] : out) {
    if (i > j) std::swap(i, j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<int, int>> edge_crossings(const PointArray& points, std::size_t limit) {
  const int n = static_cast<int>(points.rows());
  std::vector<std::pair<int, int>> out;
  if (n < 3) return out;
  for (int i = 0; i < n; ++i) {
    if (folds_back(points, i)) out.emplace_back(std::minmax(i, (i + 1) % n));
  }

  const Eigen::Vector2d lo = points.colwise().minCoeff().transpose();
  const Eigen::Vector2d hi = points.colwise().maxCoeff().transpose();
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += (pt(points, (i + 1) % n) - pt(points, i)).norm();
  const double cell = std::max(total / n, 1e-300);
  const int nx = std::clamp(static_cast<int>((hi.x() - lo.x()) / cell) + 1, 1, 4 * n);
  const int ny = std::clamp(static_cast<int>((hi.y() - lo.y()) / cell) + 1, 1, 4 * n);
  const double cx = (hi.x() - lo.x()) / nx, cy = (hi.y() - lo.y()) / ny;
  auto cell_of = [&](double v, double l, double w, int count) {
    if (w <= 0.0) return 0;
    return std::clamp(static_cast<int>((v - l) / w), 0, count - 1);
  };

  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(nx) * ny);
  for (int i = 0; i < n; ++i) {
    const Vec2 a = pt(points, i), b = pt(points, (i + 1) % n);
    // Cells are padded by one so that touching or roundoff-straddling edges share a bucket.
    const int x0 = std::max(0, cell_of(std::min(a.x(), b.x()), lo.x(), cx, nx) - 1);
    const int x1 = std::min(nx - 1, cell_of(std::max(a.x(), b.x()), lo.x(), cx, nx) + 1);
    const int y0 = std::max(0, cell_of(std::min(a.y(), b.y()), lo.y(), cy, ny) - 1);
    const int y1 = std::min(ny - 1, cell_of(std::max(a.y(), b.y()), lo.y(), cy, ny) + 1);
    for (int gx = x0; gx <= x1; ++gx) {
      for (int gy = y0; gy <= y1; ++gy) buckets[static_cast<std::size_t>(gx) * ny + gy].push_back(i);
    }
  }

  std::vector<std::pair<int, int>> candidates;
  for (const auto& bucket : buckets) {
    for (std::size_t u = 0; u < bucket.size(); ++u) {
      for (std::size_t v = u + 1; v < bucket.size(); ++v) {
        const int i = bucket[u], j = bucket[v];
        if (adjacent(i, j, n)) continue;
        candidates.emplace_back(std::minmax(i, j));
      }
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (const auto& [i, j] : candidates) {
    if (limit && out.size() >= limit) break;
    if (edges_cross(points, i, j)) out.emplace_back(i, j);
  }
  std::sort(out.begin(), out.end());
  if (limit && out.size() > limit) out.resize(limit);
  return out;
}

double min_vertex_angle(const PointArray& points) {
  const int n = static_cast<int>(points.rows());
  double best = std::numbers::pi;
  for (int i = 0; i < n; ++i) {
    const Vec2 prev = pt(points, (i + n - 1) % n), cur = pt(points, i), next = pt(points, (i + 1) % n);
    const Vec2 a = prev - cur, b = next - cur;
    const double angle = std::atan2(std::abs(a.x() * b.y() - a.y() * b.x()), a.dot(b));
    best = std::min(best, angle);
  }
  return best;
}

ValidationReport validate_shape(const PointArray& points) {
  ValidationReport r;
  if (points.rows() < DiscreteCurve::kMinSamples) {
    r.reason = "fewer than " + std::to_string(DiscreteCurve::kMinSamples) + " samples";
    return r;
  }
  if (!points.allFinite()) {
    r.reason = "non-finite coordinates";
    return r;
  }
  r.crossings = edge_crossings(points, 16);
  r.injective = r.crossings.empty();
  r.min_vertex_angle = min_vertex_angle(points);
  r.lipschitz = r.min_vertex_angle >= kMinVertexAngle;
  r.valid = r.injective && r.lipschitz;
  if (!r.injective) {
    r.reason = "edges " + std::to_string(r.crossings.front().first) + " and " +
               std::to_string(r.crossings.front().second) + " intersect";
  } else if (!r.lipschitz) {
    r.reason = "vertex angle " + std::to_string(r.min_vertex_angle) + " rad is below the cusp threshold";
  }
  return r;
}

ValidationReport validate_shape(const DiscreteCurve& c) { return validate_shape(c.points()); }

double hausdorff_distance(const PointArray& a, const PointArray& b) {
  if (a.rows() < 2 || b.rows() < 2) throw InvalidArgument("hausdorff_distance needs two polylines");
  Eigen::Vector2d lo = a.colwise().minCoeff().transpose().cwiseMin(b.colwise().minCoeff().transpose());
  Eigen::Vector2d hi = a.colwise().maxCoeff().transpose().cwiseMax(b.colwise().maxCoeff().transpose());
  const double tol = 1e-12 * std::max(1.0, (hi - lo).norm());
  return std::max(directed_hausdorff(a, b, tol), directed_hausdorff(b, a, tol));
}

bool shapes_equivalent(const DiscreteCurve& a, const DiscreteCurve& b, double tol) {
  return hausdorff_distance(a.points(), b.points()) <= tol;
}

}  // namespace shapeopt
