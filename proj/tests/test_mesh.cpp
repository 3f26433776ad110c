#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "shapeopt/errors.hpp"
#include "shapeopt/fem.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/mesh_io.hpp"
#include "support.hpp"

using namespace shapeopt;
using testsupport::kPi;

namespace {

double triangle_min_angle(const Vec2& a, const Vec2& b, const Vec2& c) {
  auto angle = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const Vec2 u = q - p, v = r - p;
    return std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v));
  };
  return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)}) * 180.0 / kPi;
}

bool on_box_boundary(const Vec2& p, const Box& box) {
  return p.x() == box.xmin || p.x() == box.xmax || p.y() == box.ymin || p.y() == box.ymax;
}

}  // namespace

TEST_CASE("annulus mesh around the unit circle passes an independent quality audit") {
  const Box box;
  const DiscreteCurve c = DiscreteCurve::circle(32, 1.0);
  const TriMesh mesh = generate_annulus_mesh(box, c, 0.2);
  REQUIRE(static_cast<int>(mesh.gamma_loop().size()) == c.size());
  for (int i = 0; i < c.size(); ++i) CHECK((mesh.node(mesh.gamma_loop()[i]) - c.point(i)).norm() == 0.0);

  double worst = 180.0, inner_area = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles().row(t);
    const Vec2 a = mesh.node(tri(0)), b = mesh.node(tri(1)), d = mesh.node(tri(2));
    CHECK(signed_triangle_area(a, b, d) > 0.0);
    worst = std::min(worst, triangle_min_angle(a, b, d));
    if (mesh.inside(t)) inner_area += signed_triangle_area(a, b, d);
  }
  CHECK(worst >= 15.0);
  CHECK(min_angle_deg(mesh) == doctest::Approx(worst).epsilon(1e-12));
  CHECK(inner_area == doctest::Approx(polygon_signed_area(c.points())).epsilon(1e-12));

  // Conformity: every interior edge is shared by exactly two triangles, boundary edges by one.
  std::map<std::pair<int, int>, int> edges;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int j = 0; j < 3; ++j) {
      const int a = mesh.triangles()(t, j), b = mesh.triangles()(t, (j + 1) % 3);
      ++edges[{std::min(a, b), std::max(a, b)}];
    }
  }
  for (const auto& [e, count] : edges) {
    const bool boundary = on_box_boundary(mesh.node(e.first), box) && on_box_boundary(mesh.node(e.second), box) &&
                          (mesh.node(e.first).x() == mesh.node(e.second).x() ||
                           mesh.node(e.first).y() == mesh.node(e.second).y());
    CHECK(count == (boundary ? 1 : 2));
  }

  // Marks.
  std::set<int> gamma(mesh.gamma_loop().begin(), mesh.gamma_loop().end());
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const int expected = gamma.count(i) ? kInterfaceNode : on_box_boundary(mesh.node(i), box) ? kOuterNode : kInteriorNode;
    CHECK(mesh.marks()[i] == expected);
  }
}

TEST_CASE("halving h roughly quadruples the triangle count") {
  const Box box;
  const TriMesh coarse = generate_annulus_mesh(box, DiscreteCurve::circle(32, 1.0), 0.2);
  const TriMesh fine = generate_annulus_mesh(box, DiscreteCurve::circle(64, 1.0), 0.1);
  const double ratio = static_cast<double>(fine.num_triangles()) / coarse.num_triangles();
  CHECK(ratio >= 2.0);
  CHECK(ratio <= 6.0);
  CHECK(min_angle_deg(fine) >= 15.0);
  CHECK(max_edge_length(fine) <= max_edge_length(coarse));
}

TEST_CASE("mesh generation on random star-shaped curves") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 5; ++t) {
    const DiscreteCurve c = testsupport::random_curve(rng, 96);
    const TriMesh mesh = generate_annulus_mesh(Box{-3, -3, 3, 3}, c, 0.15);
    CHECK(min_angle_deg(mesh) >= 15.0);
    CHECK(static_cast<int>(mesh.gamma_loop().size()) == 96);
    CHECK(extract_gamma_curve(mesh).points() == c.points());
  }
}

TEST_CASE("graded meshes respect the size bound away from the interface") {
  MeshGrading grading;
  grading.rate = 0.5;
  grading.h_max = 0.5;
  const TriMesh uniform = generate_annulus_mesh(Box{}, DiscreteCurve::circle(64, 1.0), 0.1);
  const TriMesh graded = generate_annulus_mesh(Box{}, DiscreteCurve::circle(64, 1.0), 0.1, grading);
  CHECK(graded.num_triangles() < uniform.num_triangles());
  CHECK(min_angle_deg(graded) >= 15.0);
}

TEST_CASE("mesh generation errors") {
  const Box box;
  CHECK_THROWS_AS(generate_annulus_mesh(box, DiscreteCurve::circle(32, 3.0), 0.2), MeshError);
  CHECK_THROWS_AS(generate_annulus_mesh(box, DiscreteCurve::circle(32, 2.0), 0.2), MeshError);
  CHECK_THROWS_AS(generate_annulus_mesh(box, DiscreteCurve::circle(32, 1.0), 0.0), InvalidArgument);
  CHECK_THROWS_AS(generate_annulus_mesh(Box{1, 1, 0, 0}, DiscreteCurve::circle(32, 0.2), 0.1), InvalidArgument);
  // Limacon-like loop that crosses itself but keeps positive signed area.
  const DiscreteCurve eight = DiscreteCurve::sample(64, [](double t) {
    return Vec2((0.5 + std::cos(t)) * std::cos(t), (0.5 + std::cos(t)) * std::sin(t));
  });
  CHECK_THROWS_AS(generate_annulus_mesh(box, eight, 0.1), MeshError);
}

TEST_CASE("TriMesh construction rejects invalid topology") {
  const TriMesh mesh = generate_annulus_mesh(Box{}, DiscreteCurve::circle(16, 1.0), 0.4);
  std::vector<int> loop = mesh.gamma_loop();
  std::vector<int> repeated = loop;
  repeated[3] = repeated[1];
  CHECK_THROWS_AS(TriMesh(mesh.nodes(), mesh.triangles(), mesh.marks(), repeated), MeshError);
  std::vector<int> marks = mesh.marks();
  marks[loop[0]] = kInteriorNode;
  CHECK_THROWS_AS(TriMesh(mesh.nodes(), mesh.triangles(), marks, loop), MeshError);
  TriangleArray flipped = mesh.triangles();
  std::swap(flipped(0, 1), flipped(0, 2));
  CHECK_THROWS_AS(TriMesh(mesh.nodes(), flipped, mesh.marks(), loop), MeshError);
  std::vector<int> too_short(loop.begin(), loop.begin() + 3);
  CHECK_THROWS_AS(TriMesh(mesh.nodes(), mesh.triangles(), mesh.marks(), too_short), MeshError);
  std::vector<int> bad_marks = mesh.marks();
  bad_marks[0] = 7;
  CHECK_THROWS_AS(TriMesh(mesh.nodes(), mesh.triangles(), bad_marks, loop), MeshError);
}

TEST_CASE("gamma-adjacent node set") {
  const TriMesh mesh = generate_annulus_mesh(Box{}, DiscreteCurve::circle(32, 1.0), 0.2);
  const std::vector<char> adj = gamma_adjacent_nodes(mesh);
  std::vector<char> expected(mesh.num_nodes(), 0);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    bool touches = false;
    for (int j = 0; j < 3; ++j) touches |= mesh.gamma_index(mesh.triangles()(t, j)) >= 0;
    if (touches) for (int j = 0; j < 3; ++j) expected[mesh.triangles()(t, j)] = 1;
  }
  CHECK(adj == expected);
}

TEST_CASE("native mesh format round trip with fields") {
  const TriMesh mesh = generate_annulus_mesh(Box{}, DiscreteCurve::circle(24, 1.0), 0.3);
  MeshFields fields;
  fields.scalars["target"] = mesh.nodes().col(0).array().sin().matrix() * (1.0 / 3.0);
  fields.vectors["u"] = mesh.nodes() * std::sqrt(2.0);
  std::stringstream ss;
  write_mesh(ss, mesh, fields);
  MeshFields back_fields;
  const TriMesh back = read_mesh(ss, &back_fields);
  CHECK(back.nodes() == mesh.nodes());
  CHECK(back.triangles() == mesh.triangles());
  CHECK(back.marks() == mesh.marks());
  CHECK(back.gamma_loop() == mesh.gamma_loop());
  CHECK(back_fields.scalars.at("target") == fields.scalars.at("target"));
  CHECK(back_fields.vectors.at("u") == fields.vectors.at("u"));

  std::stringstream bad("nodes 3\n0 0 0\n1 0 zero\n0 1 0\n");
  try {
    read_mesh(bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("VTK export round trip") {
  const TriMesh mesh = generate_annulus_mesh(Box{}, DiscreteCurve::circle(24, 1.0), 0.3);
  MeshFields fields;
  fields.scalars["state"] = mesh.nodes().col(1) * 0.1;
  fields.vectors["u"] = mesh.nodes() * 0.5;
  std::stringstream ss;
  write_vtk(ss, mesh, fields);
  const VtkData data = read_vtk(ss);
  CHECK(data.points == mesh.nodes());
  CHECK(data.triangles == mesh.triangles());
  CHECK(data.fields.scalars.at("state") == fields.scalars.at("state"));
  CHECK(data.fields.vectors.at("u") == fields.vectors.at("u"));
  const Eigen::VectorXd& marks = data.fields.scalars.at("mark");
  for (int i = 0; i < mesh.num_nodes(); ++i) CHECK(marks[i] == mesh.marks()[i]);
}
