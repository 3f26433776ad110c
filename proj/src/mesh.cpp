#include "shapeopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

std::uint64_t undirected_key(int a, int b) { return a < b ? edge_key(a, b) : edge_key(b, a); }

}  // namespace

double Box::distance_to_boundary(const Vec2& p) const {
  return std::min({p.x() - xmin, xmax - p.x(), p.y() - ymin, ymax - p.y()});
}

double signed_triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

TriMesh::TriMesh(PointArray nodes, TriangleArray triangles, std::vector<int> marks,
                 std::vector<int> gamma_loop)
    : nodes_(std::move(nodes)),
      triangles_(std::move(triangles)),
      marks_(std::move(marks)),
      gamma_loop_(std::move(gamma_loop)) {
  const int n = num_nodes();
  const int nt = num_triangles();
  if (static_cast<int>(marks_.size()) != n) throw MeshError("node mark count does not match nodes");
  for (int m : marks_) {
    if (m < kInteriorNode || m > kOuterNode) throw MeshError("invalid node mark " + std::to_string(m));
  }

  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(3 * static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      const int v = triangles_(t, k);
      if (v < 0 || v >= n) throw MeshError("triangle " + std::to_string(t) + " has an invalid node index");
    }
    if (triangle_area(t) <= 0.0) {
      throw MeshError("triangle " + std::to_string(t) + " is not positively oriented");
    }
    for (int k = 0; k < 3; ++k) {
      const int a = triangles_(t, k);
      const int b = triangles_(t, (k + 1) % 3);
      if (!directed.emplace(edge_key(a, b), t).second) {
        throw MeshError("mesh is not conforming at edge (" + std::to_string(a) + ", " +
                        std::to_string(b) + ")");
      }
    }
  }

  gamma_index_.assign(n, -1);
  inside_.assign(nt, 0);
  if (gamma_loop_.empty()) return;

  const int g = static_cast<int>(gamma_loop_.size());
  if (g < DiscreteCurve::kMinSamples) throw MeshError("interface loop is too short");
  for (int i = 0; i < g; ++i) {
    const int v = gamma_loop_[i];
    if (v < 0 || v >= n) throw MeshError("interface loop has an invalid node index");
    if (gamma_index_[v] != -1) {
      throw MeshError("interface loop repeats node " + std::to_string(v));
    }
    if (marks_[v] != kInterfaceNode) {
      throw MeshError("interface loop node " + std::to_string(v) + " is not marked as interface");
    }
    gamma_index_[v] = i;
  }
  PointArray loop_points(g, 2);
  for (int i = 0; i < g; ++i) loop_points.row(i) = nodes_.row(gamma_loop_[i]);
  if (polygon_signed_area(loop_points) < 0.0) {
    std::vector<int> reversed(g);
    for (int i = 0; i < g; ++i) reversed[i] = gamma_loop_[(g - i) % g];
    gamma_loop_ = std::move(reversed);
    for (int i = 0; i < g; ++i) gamma_index_[gamma_loop_[i]] = i;
  }

  std::unordered_map<std::uint64_t, char> gamma_edges;
  std::vector<int> stack;
  for (int i = 0; i < g; ++i) {
    const int a = gamma_loop_[i];
    const int b = gamma_loop_[(i + 1) % g];
    const auto left = directed.find(edge_key(a, b));
    const auto right = directed.find(edge_key(b, a));
    if (left == directed.end() && right == directed.end()) {
      throw MeshError("interface loop step " + std::to_string(i) + " is not a mesh edge");
    }
    gamma_edges.emplace(undirected_key(a, b), 1);
    if (left != directed.end()) stack.push_back(left->second);
  }
  while (!stack.empty()) {
    const int t = stack.back();
    stack.pop_back();
    if (inside_[t]) continue;
    inside_[t] = 1;
    for (int k = 0; k < 3; ++k) {
      const int a = triangles_(t, k);
      const int b = triangles_(t, (k + 1) % 3);
      if (gamma_edges.count(undirected_key(a, b))) continue;
      const auto across = directed.find(edge_key(b, a));
      if (across != directed.end() && !inside_[across->second]) stack.push_back(across->second);
    }
  }
}

double TriMesh::triangle_area(int t) const {
  return signed_triangle_area(node(triangles_(t, 0)), node(triangles_(t, 1)), node(triangles_(t, 2)));
}

TriMesh TriMesh::with_nodes(PointArray nodes) const {
  if (nodes.rows() != nodes_.rows()) throw InvalidArgument("node count mismatch in with_nodes");
  TriMesh out;
  out.nodes_ = std::move(nodes);
  out.triangles_ = triangles_;
  out.marks_ = marks_;
  out.gamma_loop_ = gamma_loop_;
  out.gamma_index_ = gamma_index_;
  out.inside_ = inside_;
  for (int t = 0; t < out.num_triangles(); ++t) {
    if (!(out.triangle_area(t) > 0.0)) {
      throw TangledMeshError("triangle " + std::to_string(t) + " is inverted", 0.0);
    }
  }
  return out;
}

double min_angle_deg(const TriMesh& mesh) {
  double worst = 180.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const Vec2 p = mesh.node(mesh.triangles()(t, k));
      const Vec2 a = mesh.node(mesh.triangles()(t, (k + 1) % 3)) - p;
      const Vec2 b = mesh.node(mesh.triangles()(t, (k + 2) % 3)) - p;
      const double angle = std::atan2(std::abs(a.x() * b.y() - a.y() * b.x()), a.dot(b));
      worst = std::min(worst, angle * 180.0 / std::numbers::pi);
    }
  }
  return worst;
}

double min_triangle_area(const TriMesh& mesh) {
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < mesh.num_triangles(); ++t) worst = std::min(worst, mesh.triangle_area(t));
  return worst;
}

double max_edge_length(const TriMesh& mesh) {
  double longest = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      longest = std::max(longest, (mesh.node(mesh.triangles()(t, k)) -
                                   mesh.node(mesh.triangles()(t, (k + 1) % 3))).norm());
    }
  }
  return longest;
}

std::vector<char> gamma_adjacent_nodes(const TriMesh& mesh) {
  std::vector<char> flags(mesh.num_nodes(), 0);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles().row(t);
    if (mesh.gamma_index(tri(0)) < 0 && mesh.gamma_index(tri(1)) < 0 && mesh.gamma_index(tri(2)) < 0) {
      continue;
    }
    for (int k = 0; k < 3; ++k) flags[tri(k)] = 1;
  }
  return flags;
}

}  // namespace shapeopt
