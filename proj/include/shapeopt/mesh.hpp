#pragma once

#include <Eigen/Core>

#include <vector>

#include "shapeopt/curve.hpp"

namespace shapeopt {

/// Axis-aligned hold-all rectangle.
struct Box {
  double xmin = -2.0;
  double ymin = -2.0;
  double xmax = 2.0;
  double ymax = 2.0;

  bool strictly_contains(const Vec2& p) const {
    return p.x() > xmin && p.x() < xmax && p.y() > ymin && p.y() < ymax;
  }
  double distance_to_boundary(const Vec2& p) const;
};

enum NodeMark : int { kInteriorNode = 0, kInterfaceNode = 1, kOuterNode = 2 };

using TriangleArray = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// Triangulation of the hold-all box with the interface loop Gamma as an edge path.
///
/// Construction checks positive orientation of every triangle, conformity, and that the
/// loop is a simple cycle of mesh edges whose nodes carry the interface mark. The loop is
/// stored counter-clockwise; triangles to its left form the inner region.
class TriMesh {
 public:
  TriMesh() = default;  // empty
  TriMesh(PointArray nodes, TriangleArray triangles, std::vector<int> marks,
          std::vector<int> gamma_loop);

  int num_nodes() const { return static_cast<int>(nodes_.rows()); }
  int num_triangles() const { return static_cast<int>(triangles_.rows()); }
  const PointArray& nodes() const { return nodes_; }
  Vec2 node(int i) const { return nodes_.row(i).transpose(); }
  const TriangleArray& triangles() const { return triangles_; }
  const std::vector<int>& marks() const { return marks_; }
  const std::vector<int>& gamma_loop() const { return gamma_loop_; }
  bool has_gamma() const { return !gamma_loop_.empty(); }
  /// Position of a node in the loop, or -1.
  int gamma_index(int node) const { return gamma_index_[node]; }
  /// True for triangles of the inner region.
  bool inside(int t) const { return inside_[t] != 0; }
  const std::vector<char>& inside_flags() const { return inside_; }

  double triangle_area(int t) const;

  /// Same topology at new node positions; throws TangledMeshError if a triangle
  /// loses positive area.
  TriMesh with_nodes(PointArray nodes) const;

 private:

  PointArray nodes_;
  TriangleArray triangles_;
  std::vector<int> marks_;
  std::vector<int> gamma_loop_;
  std::vector<int> gamma_index_;
  std::vector<char> inside_;
};

double signed_triangle_area(const Vec2& a, const Vec2& b, const Vec2& c);
/// Smallest interior angle over all triangles, in degrees.
double min_angle_deg(const TriMesh& mesh);
double min_triangle_area(const TriMesh& mesh);
double max_edge_length(const TriMesh& mesh);

/// Nodes of triangles that have at least one Gamma node.
std::vector<char> gamma_adjacent_nodes(const TriMesh& mesh);

/// Optional grading of the target size away from Gamma: size(x) = min(h_max, h + g d(x, Gamma)).
struct MeshGrading {
  double rate = 0.0;
  double h_max = 0.0;
};

/// Constrained Delaunay triangulation of the box with the curve polygon as an internal edge
/// path, refined to the target size with a minimum-angle guarantee of 15 degrees. The loop
/// nodes are the curve samples in order.
TriMesh generate_annulus_mesh(const Box& box, const DiscreteCurve& curve, double target_h,
                              const MeshGrading& grading = {});
/// Quality triangulation of the box alone (no interface).
TriMesh generate_box_mesh(const Box& box, double target_h);

}  // namespace shapeopt
