#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "shapeopt/errors.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/predicates.hpp"

namespace shapeopt {

namespace {

enum : signed char { kFree = 0, kBoxSegment = 1, kGammaSegment = 2 };

constexpr double kQualityDeg = 25.0;
constexpr double kAuditDeg = 15.0;

int next(int i) { return i == 2 ? 0 : i + 1; }
int prev(int i) { return i == 0 ? 2 : i - 1; }

// Edge k of a triangle is the one opposite v[k], running v[k+1] -> v[k+2].
struct Tri {
  std::array<int, 3> v{};
  std::array<int, 3> nb{-1, -1, -1};
  std::array<signed char, 3> cons{kFree, kFree, kFree};
};

struct Located {
  int tri = -1;
  int edge = -1;    // >= 0 when the point lies on this edge
  int vertex = -1;  // >= 0 when the point coincides with this vertex
};

struct WalkResult {
  int tri = -1;
  int blocked_edge = -1;  // constrained edge crossed on the way
};

double circumradius(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double la = (b - c).norm();
  const double lb = (c - a).norm();
  const double lc = (a - b).norm();
  const double area = std::abs(signed_triangle_area(a, b, c));
  return la * lb * lc / (4.0 * area);
}

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ba = b - a;
  const Vec2 ca = c - a;
  const double d = 2.0 * (ba.x() * ca.y() - ba.y() * ca.x());
  const double b2 = ba.squaredNorm();
  const double c2 = ca.squaredNorm();
  return a + Vec2(ca.y() * b2 - ba.y() * c2, ba.x() * c2 - ca.x() * b2) / d;
}

double min_angle_of(const Vec2& a, const Vec2& b, const Vec2& c) {
  const std::array<Vec2, 3> p{a, b, c};
  double worst = 180.0;
  for (int k = 0; k < 3; ++k) {
    const Vec2 u = p[next(k)] - p[k];
    const Vec2 w = p[prev(k)] - p[k];
    const double angle = std::atan2(std::abs(u.x() * w.y() - u.y() * w.x()), u.dot(w));
    worst = std::min(worst, angle * 180.0 / std::numbers::pi);
  }
  return worst;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

class Triangulator {
 public:
  Triangulator(const Box& box, std::function<double(const Vec2&)> size)
      : box_(box), size_(std::move(size)) {
    add_vertex(Vec2(box.xmin, box.ymin), kOuterNode);
    add_vertex(Vec2(box.xmax, box.ymin), kOuterNode);
    add_vertex(Vec2(box.xmax, box.ymax), kOuterNode);
    add_vertex(Vec2(box.xmin, box.ymax), kOuterNode);
    Tri t0;
    t0.v = {0, 1, 2};
    t0.nb = {-1, 1, -1};
    t0.cons = {kBoxSegment, kFree, kBoxSegment};
    Tri t1;
    t1.v = {0, 2, 3};
    t1.nb = {-1, -1, 0};
    t1.cons = {kBoxSegment, kBoxSegment, kFree};
    tris_ = {t0, t1};
  }

  void subdivide_box() {
    const std::array<Vec2, 4> corner{pts_[0], pts_[1], pts_[2], pts_[3]};
    for (int side = 0; side < 4; ++side) {
      const Vec2 a = corner[side];
      const Vec2 b = corner[(side + 1) % 4];
      const double len = (b - a).norm();
      const int pieces = std::max(1, static_cast<int>(std::ceil(len / size_(0.5 * (a + b)) - 1e-9)));
      for (int k = 1; k < pieces; ++k) {
        Vec2 p = a + (b - a) * (static_cast<double>(k) / pieces);
        // Keep the point exactly on the box line.
        if (side == 0) p.y() = box_.ymin;
        if (side == 1) p.x() = box_.xmax;
        if (side == 2) p.y() = box_.ymax;
        if (side == 3) p.x() = box_.xmin;
        insert_point(p, kOuterNode);
      }
    }
  }

  int insert_curve_point(const Vec2& p) {
    const int v = insert_point(p, kInterfaceNode);
    if (v < 0) throw MeshError("interface point coincides with an existing mesh node");
    return v;
  }

  void recover_segment(int a, int b) {
    if (mark_if_edge(a, b)) return;
    std::deque<std::pair<int, int>> crossing = crossing_edges(a, b);
    int guard = 0;
    while (!crossing.empty()) {
      if (++guard > 100000) throw MeshError("interface edge recovery did not terminate");
      const auto [x, y] = crossing.front();
      crossing.pop_front();
      int t = -1;
      int e = -1;
      if (!find_edge(x, y, t, e)) continue;
      const Tri& T = tris_[t];
      const int u = T.nb[e];
      const Tri& U = tris_[u];
      const int j = index_of_neighbor(U, t);
      const int p = T.v[e];
      const int q = U.v[j];
      const bool convex = orient2d(pts_[p], pts_[x], pts_[q]) * orient2d(pts_[p], pts_[y], pts_[q]) < 0 &&
                          orient2d(pts_[x], pts_[y], pts_[p]) * orient2d(pts_[x], pts_[y], pts_[q]) < 0;
      if (!convex) {
        crossing.emplace_back(x, y);
        continue;
      }
      flip(t, e);
      if (p != a && p != b && q != a && q != b && properly_cross(a, b, p, q)) {
        crossing.emplace_back(p, q);
      }
    }
    if (!mark_if_edge(a, b)) throw MeshError("failed to recover an interface edge");
  }

  void make_delaunay() {
    std::vector<std::pair<int, int>> stack;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      for (int e = 0; e < 3; ++e) stack.emplace_back(t, e);
    }
    legalize(stack);
  }

  void set_gamma(std::vector<int> loop) { gamma_ = std::move(loop); }

  /// Equilateral apex points next to every interface edge, on both sides.
  void insert_interface_layer() {
    const int g = static_cast<int>(gamma_.size());
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i < g; ++i) {
        const int a = gamma_[i];
        const int b = gamma_[(i + 1) % g];
        try_insert_apex(a, b, side == 0 ? 1 : -1);
      }
    }
  }

  void refine() {
    std::deque<int> queue;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) queue.push_back(t);
    const double area = (box_.xmax - box_.xmin) * (box_.ymax - box_.ymin);
    const double hmin = size_(Vec2(0.5 * (box_.xmin + box_.xmax), 0.5 * (box_.ymin + box_.ymax)));
    const std::size_t cap = static_cast<std::size_t>(40.0 * area / (hmin * hmin)) + 20 * pts_.size() + 10000;

    while (!queue.empty()) {
      const int t = queue.front();
      queue.pop_front();
      if (!needs_refinement(t)) continue;
      if (pts_.size() > cap) throw MeshError("mesh refinement exceeded its vertex budget");
      touched_.clear();
      if (!split_triangle(t)) unrefinable_.insert(key_of(t));
      for (int s : touched_) queue.push_back(s);
      if (needs_refinement(t)) queue.push_back(t);
    }
  }

  TriMesh build() const {
    const int n = static_cast<int>(pts_.size());
    PointArray nodes(n, 2);
    for (int i = 0; i < n; ++i) nodes.row(i) = pts_[i].transpose();
    TriangleArray tris(static_cast<int>(tris_.size()), 3);
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      for (int k = 0; k < 3; ++k) tris(t, k) = tris_[t].v[k];
    }
    TriMesh mesh(std::move(nodes), std::move(tris), marks_, gamma_);
    const double worst = min_angle_deg(mesh);
    if (worst < kAuditDeg) {
      throw MeshError("mesh quality audit failed: minimum angle " + std::to_string(worst) +
                      " deg is below " + std::to_string(kAuditDeg));
    }
    return mesh;
  }

 private:
  int add_vertex(const Vec2& p, int mark) {
    pts_.push_back(p);
    marks_.push_back(mark);
    return static_cast<int>(pts_.size()) - 1;
  }

  static int index_of_neighbor(const Tri& t, int other) {
    for (int k = 0; k < 3; ++k) {
      if (t.nb[k] == other) return k;
    }
    throw MeshError("corrupt triangle adjacency");
  }

  void replace_neighbor(int t, int old_nb, int new_nb) {
    if (t < 0) return;
    Tri& T = tris_[t];
    for (int k = 0; k < 3; ++k) {
      if (T.nb[k] == old_nb) {
        T.nb[k] = new_nb;
        return;
      }
    }
    throw MeshError("corrupt triangle adjacency");
  }

  std::array<int, 3> key_of(int t) const {
    std::array<int, 3> k = tris_[t].v;
    std::sort(k.begin(), k.end());
    return k;
  }

  Vec2 P(int v) const { return pts_[v]; }

  bool properly_cross(int a, int b, int p, int q) const {
    const int o1 = orient2d(P(a), P(b), P(p));
    const int o2 = orient2d(P(a), P(b), P(q));
    const int o3 = orient2d(P(p), P(q), P(a));
    const int o4 = orient2d(P(p), P(q), P(b));
    return o1 * o2 < 0 && o3 * o4 < 0;
  }

  bool find_edge(int x, int y, int& tri, int& edge) const {
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      const Tri& T = tris_[t];
      for (int e = 0; e < 3; ++e) {
        const int p = T.v[next(e)];
        const int q = T.v[prev(e)];
        if ((p == x && q == y) || (p == y && q == x)) {
          tri = t;
          edge = e;
          return true;
        }
      }
    }
    return false;
  }

  bool mark_if_edge(int a, int b) {
    int t = -1;
    int e = -1;
    if (!find_edge(a, b, t, e)) return false;
    tris_[t].cons[e] = kGammaSegment;
    const int u = tris_[t].nb[e];
    if (u >= 0) tris_[u].cons[index_of_neighbor(tris_[u], t)] = kGammaSegment;
    return true;
  }

  std::deque<std::pair<int, int>> crossing_edges(int a, int b) const {
    std::deque<std::pair<int, int>> out;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      const Tri& T = tris_[t];
      for (int e = 0; e < 3; ++e) {
        const int x = T.v[next(e)];
        const int y = T.v[prev(e)];
        if (x > y) continue;
        if (x == a || x == b || y == a || y == b) continue;
        if (properly_cross(a, b, x, y)) out.emplace_back(x, y);
        const int ox = orient2d(P(a), P(b), P(x));
        if (ox == 0 && segments_intersect(P(a), P(b), P(x), P(x))) {
          throw MeshError("a mesh node lies on an interface edge");
        }
      }
    }
    return out;
  }

  // Flips the edge opposite v[e] of triangle t. Afterwards t = (p, a, q), u = (q, b, p).
  void flip(int t, int e) {
    Tri T = tris_[t];
    const int u = T.nb[e];
    Tri U = tris_[u];
    const int j = index_of_neighbor(U, t);
    const int p = T.v[e];
    const int a = T.v[next(e)];
    const int b = T.v[prev(e)];
    const int q = U.v[j];

    const int t_bp = T.nb[next(e)];
    const signed char c_bp = T.cons[next(e)];
    const int t_pa = T.nb[prev(e)];
    const signed char c_pa = T.cons[prev(e)];
    const int u_aq = U.nb[next(j)];
    const signed char c_aq = U.cons[next(j)];
    const int u_qb = U.nb[prev(j)];
    const signed char c_qb = U.cons[prev(j)];

    Tri nt;
    nt.v = {p, a, q};
    nt.nb = {u_aq, u, t_pa};
    nt.cons = {c_aq, kFree, c_pa};
    Tri nu;
    nu.v = {q, b, p};
    nu.nb = {t_bp, t, u_qb};
    nu.cons = {c_bp, kFree, c_qb};
    tris_[t] = nt;
    tris_[u] = nu;
    replace_neighbor(t_bp, t, u);
    replace_neighbor(u_aq, u, t);
    touched_.push_back(t);
    touched_.push_back(u);
  }

  void legalize(std::vector<std::pair<int, int>>& stack) {
    while (!stack.empty()) {
      const auto [t, e] = stack.back();
      stack.pop_back();
      const Tri& T = tris_[t];
      if (T.cons[e] != kFree || T.nb[e] < 0) continue;
      const int u = T.nb[e];
      const Tri& U = tris_[u];
      const int q = U.v[index_of_neighbor(U, t)];
      if (incircle(P(T.v[0]), P(T.v[1]), P(T.v[2]), P(q)) <= 0) continue;
      flip(t, e);
      // t = (p, a, q), u = (q, b, p): new outer edges are t's edge 0 and u's edge 2, plus
      // the two edges on the p side whose Delaunay status may have changed.
      stack.emplace_back(t, 0);
      stack.emplace_back(u, 2);
      stack.emplace_back(t, 2);
      stack.emplace_back(u, 0);
    }
  }

  Located locate(const Vec2& p, int start) const {
    int t = (start >= 0 && start < static_cast<int>(tris_.size())) ? start : 0;
    std::uint32_t lcg = 12345u;
    const std::size_t limit = 4 * tris_.size() + 64;
    for (std::size_t step = 0; step < limit; ++step) {
      const Tri& T = tris_[t];
      lcg = lcg * 1664525u + 1013904223u;
      const int r = static_cast<int>((lcg >> 16) % 3);
      bool moved = false;
      for (int k = 0; k < 3 && !moved; ++k) {
        const int e = (k + r) % 3;
        if (orient2d(P(T.v[next(e)]), P(T.v[prev(e)]), p) < 0) {
          if (T.nb[e] < 0) return {};
          t = T.nb[e];
          moved = true;
        }
      }
      if (!moved) return classify(t, p);
    }
    for (int s = 0; s < static_cast<int>(tris_.size()); ++s) {
      const Tri& T = tris_[s];
      bool inside = true;
      for (int e = 0; e < 3 && inside; ++e) {
        inside = orient2d(P(T.v[next(e)]), P(T.v[prev(e)]), p) >= 0;
      }
      if (inside) return classify(s, p);
    }
    return {};
  }

  Located classify(int t, const Vec2& p) const {
    const Tri& T = tris_[t];
    Located out;
    out.tri = t;
    for (int k = 0; k < 3; ++k) {
      if (P(T.v[k]) == p) {
        out.vertex = T.v[k];
        return out;
      }
    }
    for (int e = 0; e < 3; ++e) {
      if (orient2d(P(T.v[next(e)]), P(T.v[prev(e)]), p) == 0) out.edge = e;
    }
    return out;
  }

  // Straight-line walk from the centroid of t towards p; stops at constrained edges.
  WalkResult walk(int t, const Vec2& p) const {
    const Tri& T0 = tris_[t];
    const Vec2 q = (P(T0.v[0]) + P(T0.v[1]) + P(T0.v[2])) / 3.0;
    const std::size_t limit = 4 * tris_.size() + 64;
    for (std::size_t step = 0; step < limit; ++step) {
      const Tri& T = tris_[t];
      int exit = -1;
      int fallback = -1;
      for (int e = 0; e < 3; ++e) {
        const Vec2 a = P(T.v[next(e)]);
        const Vec2 b = P(T.v[prev(e)]);
        if (orient2d(a, b, p) >= 0) continue;
        fallback = e;
        if (orient2d(q, p, a) <= 0 && orient2d(q, p, b) >= 0) {
          exit = e;
          break;
        }
      }
      if (fallback < 0) return {t, -1};
      if (exit < 0) exit = fallback;
      if (T.cons[exit] != kFree || T.nb[exit] < 0) return {t, exit};
      t = T.nb[exit];
    }
    const Located loc = locate(p, t);
    return {loc.tri, -1};
  }

  int insert_point(const Vec2& p, int mark) {
    const Located loc = locate(p, last_);
    if (loc.tri < 0) throw MeshError("point lies outside the hold-all box");
    if (loc.vertex >= 0) return -1;
    if (loc.edge >= 0) {
      const signed char c = tris_[loc.tri].cons[loc.edge];
      if (c == kGammaSegment) return -1;
      return split_edge(loc.tri, loc.edge, p, c == kBoxSegment ? kOuterNode : mark);
    }
    return split_interior(loc.tri, p, mark);
  }

  int split_interior(int t, const Vec2& p, int mark) {
    const int vi = add_vertex(p, mark);
    const Tri T = tris_[t];
    const int a = T.v[0];
    const int b = T.v[1];
    const int c = T.v[2];
    const int t0 = t;
    const int t1 = static_cast<int>(tris_.size());
    const int t2 = t1 + 1;
    Tri n0;
    n0.v = {a, b, vi};
    n0.nb = {t1, t2, T.nb[2]};
    n0.cons = {kFree, kFree, T.cons[2]};
    Tri n1;
    n1.v = {b, c, vi};
    n1.nb = {t2, t0, T.nb[0]};
    n1.cons = {kFree, kFree, T.cons[0]};
    Tri n2;
    n2.v = {c, a, vi};
    n2.nb = {t0, t1, T.nb[1]};
    n2.cons = {kFree, kFree, T.cons[1]};
    tris_[t0] = n0;
    tris_.push_back(n1);
    tris_.push_back(n2);
    replace_neighbor(T.nb[0], t, t1);
    replace_neighbor(T.nb[1], t, t2);
    touched_.insert(touched_.end(), {t0, t1, t2});
    std::vector<std::pair<int, int>> stack{{t0, 2}, {t1, 2}, {t2, 2}};
    legalize(stack);
    last_ = t0;
    return vi;
  }

  int split_edge(int t, int e, const Vec2& p, int mark) {
    const int vi = add_vertex(p, mark);
    const Tri T = tris_[t];
    const int c = T.v[e];
    const int a = T.v[next(e)];
    const int b = T.v[prev(e)];
    const signed char ce = T.cons[e];
    const int u = T.nb[e];

    const int t0 = t;
    const int t1 = static_cast<int>(tris_.size());
    tris_.emplace_back();
    int u0 = -1;
    int u1 = -1;
    Tri U;
    if (u >= 0) {
      U = tris_[u];
      u0 = u;
      u1 = static_cast<int>(tris_.size());
      tris_.emplace_back();
    }

    Tri n0;
    n0.v = {c, a, vi};
    n0.nb = {u1, t1, T.nb[prev(e)]};
    n0.cons = {ce, kFree, T.cons[prev(e)]};
    Tri n1;
    n1.v = {c, vi, b};
    n1.nb = {u0, T.nb[next(e)], t0};
    n1.cons = {ce, T.cons[next(e)], kFree};
    tris_[t0] = n0;
    tris_[t1] = n1;
    replace_neighbor(T.nb[next(e)], t, t1);

    std::vector<std::pair<int, int>> stack{{t0, 2}, {t1, 1}};
    touched_.insert(touched_.end(), {t0, t1});
    if (u >= 0) {
      const int j = index_of_neighbor(U, t);
      const int d = U.v[j];
      // U = (d, b, a) counter-clockwise.
      Tri m0;
      m0.v = {d, b, vi};
      m0.nb = {t1, u1, U.nb[prev(j)]};
      m0.cons = {ce, kFree, U.cons[prev(j)]};
      Tri m1;
      m1.v = {d, vi, a};
      m1.nb = {t0, U.nb[next(j)], u0};
      m1.cons = {ce, U.cons[next(j)], kFree};
      tris_[u0] = m0;
      tris_[u1] = m1;
      replace_neighbor(U.nb[next(j)], u, u1);
      stack.emplace_back(u0, 2);
      stack.emplace_back(u1, 1);
      touched_.insert(touched_.end(), {u0, u1});
    }
    legalize(stack);
    last_ = t0;
    return vi;
  }

  bool is_gamma_edge_triangle(int t) const {
    for (int e = 0; e < 3; ++e) {
      if (tris_[t].cons[e] == kGammaSegment) return true;
    }
    return false;
  }

  bool needs_refinement(int t) const {
    const Tri& T = tris_[t];
    const Vec2 a = P(T.v[0]);
    const Vec2 b = P(T.v[1]);
    const Vec2 c = P(T.v[2]);
    if (unrefinable_.count(key_of(t))) return false;
    if (min_angle_of(a, b, c) < kQualityDeg) return true;
    if (is_gamma_edge_triangle(t)) return false;
    return circumradius(a, b, c) > 0.62 * size_((a + b + c) / 3.0);
  }

  // Distance from p to the nearest vertex of the triangles whose circumcircle contains p.
  double clearance(int t, const Vec2& p, std::vector<std::pair<int, int>>* constrained) const {
    std::vector<int> todo{t};
    std::set<int> seen{t};
    double best = std::numeric_limits<double>::infinity();
    while (!todo.empty()) {
      const int s = todo.back();
      todo.pop_back();
      const Tri& S = tris_[s];
      for (int k = 0; k < 3; ++k) best = std::min(best, (P(S.v[k]) - p).norm());
      for (int e = 0; e < 3; ++e) {
        if (S.cons[e] != kFree) {
          if (constrained) constrained->emplace_back(s, e);
          continue;
        }
        const int u = S.nb[e];
        if (u < 0 || seen.count(u)) continue;
        const Tri& U = tris_[u];
        if (incircle(P(U.v[0]), P(U.v[1]), P(U.v[2]), p) > 0) {
          seen.insert(u);
          todo.push_back(u);
        }
      }
    }
    return best;
  }

  bool encroaches(const Vec2& p, int t, int e) const {
    const Vec2 a = P(tris_[t].v[next(e)]);
    const Vec2 b = P(tris_[t].v[prev(e)]);
    return (a - p).dot(b - p) < 0.0;
  }

  void split_box_segment(int t, int e) {
    const Vec2 a = P(tris_[t].v[next(e)]);
    const Vec2 b = P(tris_[t].v[prev(e)]);
    Vec2 mid = 0.5 * (a + b);
    if (a.x() == b.x()) mid.x() = a.x();
    if (a.y() == b.y()) mid.y() = a.y();
    split_edge(t, e, mid, kOuterNode);
  }

  // Apex of the equilateral triangle on the interface edge (a, b), on the given side
  // (+1 left of a->b, -1 right). Returns false if the apex would crowd existing geometry.
  bool try_insert_apex(int a, int b, int side) {
    const Vec2 pa = P(a);
    const Vec2 pb = P(b);
    const Vec2 d = pb - pa;
    const double len = d.norm();
    const Vec2 left(-d.y() / len, d.x() / len);
    const Vec2 apex = 0.5 * (pa + pb) + side * (std::sqrt(3.0) / 2.0) * len * left;
    if (!box_.strictly_contains(apex) || box_.distance_to_boundary(apex) < 0.5 * len) return false;
    const int g = static_cast<int>(gamma_.size());
    for (int i = 0; i < g; ++i) {
      const int x = gamma_[i];
      const int y = gamma_[(i + 1) % g];
      if ((x == a && y == b) || (x == b && y == a)) continue;
      if (point_segment_distance(apex, P(x), P(y)) < 0.5 * len) return false;
      if (segments_intersect(0.5 * (pa + pb), apex, P(x), P(y))) return false;
    }
    const Located loc = locate(apex, last_);
    if (loc.tri < 0 || loc.vertex >= 0) return false;
    if (clearance(loc.tri, apex, nullptr) < 0.5 * len) return false;
    return insert_point(apex, kInteriorNode) >= 0;
  }

  bool split_triangle(int t) {
    const Tri T = tris_[t];
    const Vec2 a = P(T.v[0]);
    const Vec2 b = P(T.v[1]);
    const Vec2 c = P(T.v[2]);
    const Vec2 cc = circumcenter(a, b, c);
    const Vec2 centroid = (a + b + c) / 3.0;
    const double shortest = std::min({(a - b).norm(), (b - c).norm(), (c - a).norm()});

    const WalkResult w = walk(t, cc);
    if (w.blocked_edge >= 0) {
      const signed char kind = tris_[w.tri].cons[w.blocked_edge];
      if (kind == kBoxSegment) {
        split_box_segment(w.tri, w.blocked_edge);
        return true;
      }
      return handle_interface(w.tri, w.blocked_edge, centroid);
    }
    std::vector<std::pair<int, int>> constrained;
    const double gap = clearance(w.tri, cc, &constrained);
    for (const auto& [s, e] : constrained) {
      if (tris_[s].cons[e] == kBoxSegment && encroaches(cc, s, e)) {
        split_box_segment(s, e);
        return true;
      }
    }
    for (const auto& [s, e] : constrained) {
      if (tris_[s].cons[e] == kGammaSegment && encroaches(cc, s, e)) {
        return handle_interface(s, e, centroid);
      }
    }
    if (gap < 1e-3 * shortest) return false;
    last_ = w.tri;
    return insert_point(cc, kInteriorNode) >= 0;
  }

  bool handle_interface(int t, int e, const Vec2& from) {
    const int a = tris_[t].v[next(e)];
    const int b = tris_[t].v[prev(e)];
    const int side = orient2d(P(a), P(b), from) >= 0 ? 1 : -1;
    return try_insert_apex(a, b, side);
  }

  Box box_;
  std::function<double(const Vec2&)> size_;
  std::vector<Vec2> pts_;
  std::vector<int> marks_;
  std::vector<Tri> tris_;
  std::vector<int> gamma_;
  std::vector<int> touched_;
  std::set<std::array<int, 3>> unrefinable_;
  int last_ = 0;
};

void check_curve_for_meshing(const Box& box, const DiscreteCurve& curve) {
  const int n = curve.size();
  for (int i = 0; i < n; ++i) {
    if (!box.strictly_contains(curve.point(i))) {
      throw MeshError("curve sample " + std::to_string(i) + " is not strictly inside the box");
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_intersect(curve.point(i), curve.point((i + 1) % n), curve.point(j),
                             curve.point((j + 1) % n))) {
        throw MeshError("curve self-intersects (edges " + std::to_string(i) + " and " +
                        std::to_string(j) + ")");
      }
    }
  }
}

void check_box(const Box& box, double target_h) {
  if (!(box.xmax > box.xmin && box.ymax > box.ymin)) throw InvalidArgument("empty mesh box");
  if (!(target_h > 0.0)) throw InvalidArgument("target mesh size must be positive");
}

}  // namespace

TriMesh generate_annulus_mesh(const Box& box, const DiscreteCurve& curve, double target_h,
                              const MeshGrading& grading) {
  check_box(box, target_h);
  check_curve_for_meshing(box, curve);
  std::function<double(const Vec2&)> size = [target_h](const Vec2&) { return target_h; };
  if (grading.rate > 0.0) {
    const double h_max = grading.h_max > target_h ? grading.h_max : 1e300;
    const DiscreteCurve shape = curve;
    size = [shape, target_h, h_max, rate = grading.rate](const Vec2& p) {
      double d = std::numeric_limits<double>::infinity();
      const int n = shape.size();
      for (int i = 0; i < n; ++i) {
        d = std::min(d, point_segment_distance(p, shape.point(i), shape.point((i + 1) % n)));
      }
      return std::min(h_max, target_h + rate * d);
    };
  }
  // Interface edges cannot be split, so the size field never drops below the length of a
  // nearby interface edge; it relaxes back to the target at half the distance rate.
  std::vector<int> long_edges;
  for (int i = 0; i < curve.size(); ++i) {
    if ((curve.point((i + 1) % curve.size()) - curve.point(i)).norm() > target_h) long_edges.push_back(i);
  }
  if (!long_edges.empty()) {
    size = [base = size, shape = curve, long_edges](const Vec2& p) {
      double s = base(p);
      const int n = shape.size();
      for (int i : long_edges) {
        const Vec2 a = shape.point(i);
        const Vec2 b = shape.point((i + 1) % n);
        s = std::max(s, (b - a).norm() - 0.5 * point_segment_distance(p, a, b));
      }
      return s;
    };
  }
  Triangulator tri(box, size);
  tri.subdivide_box();
  std::vector<int> loop(curve.size());
  for (int i = 0; i < curve.size(); ++i) loop[i] = tri.insert_curve_point(curve.point(i));
  for (int i = 0; i < curve.size(); ++i) tri.recover_segment(loop[i], loop[(i + 1) % curve.size()]);
  tri.make_delaunay();
  tri.set_gamma(loop);
  tri.insert_interface_layer();
  tri.refine();
  return tri.build();
}

TriMesh generate_box_mesh(const Box& box, double target_h) {
  check_box(box, target_h);
  Triangulator tri(box, [target_h](const Vec2&) { return target_h; });
  tri.subdivide_box();
  tri.refine();
  return tri.build();
}

}  // namespace shapeopt
