#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "shapeopt/predicates.hpp"
#include "shapeopt/validate.hpp"
#include "polygons.hpp"
#include "support.hpp"

using namespace shapeopt;
using testsupport::kPi;

using testsupport::has_repeated_vertex;
using testsupport::oracle_crossings;
using testsupport::random_polygon;
using testsupport::rotate_index;

TEST_CASE("crossing search agrees with brute force on 1000 random polygons") {
  std::mt19937_64 rng(2024);
  int crossing_cases = 0, simple_cases = 0;
  for (int t = 0; t < 1000; ++t) {
    const PointArray p = random_polygon(rng);
    const auto fast = edge_crossings(p);
    const auto brute = edge_crossings_bruteforce(p);
    const auto oracle = oracle_crossings(p);
    std::string diff;
    for (std::size_t k = 0; k < std::min(fast.size(), oracle.size()); ++k) {
      if (fast[k] != oracle[k] || brute[k] != oracle[k]) {
        diff = std::to_string(fast[k].first) + "," + std::to_string(fast[k].second) + " / " +
               std::to_string(brute[k].first) + "," + std::to_string(brute[k].second) + " / " +
               std::to_string(oracle[k].first) + "," + std::to_string(oracle[k].second);
        break;
      }
    }
    INFO("n = " << p.rows() << " first difference fast/brute/oracle " << diff);
    CHECK(fast == brute);
    CHECK(brute == oracle);
    const ValidationReport rep = validate_shape(p);
    const bool expect_injective = oracle.empty() && !has_repeated_vertex(p);
    if (p.rows() >= DiscreteCurve::kMinSamples) {
      CHECK(rep.injective == expect_injective);
    } else {
      CHECK_FALSE(rep.valid);
    }
    if (!rep.valid) CHECK_FALSE(rep.reason.empty());
    if (!rep.injective && p.rows() >= DiscreteCurve::kMinSamples) CHECK_FALSE(rep.crossings.empty());
    CHECK(edge_crossings(p, 1).size() == std::min<std::size_t>(1, oracle.size()));
    (expect_injective ? simple_cases : crossing_cases) += 1;
  }
  MESSAGE(simple_cases << " simple, " << crossing_cases << " non-injective");
  CHECK(simple_cases > 100);
  CHECK(crossing_cases > 100);
}

TEST_CASE("circle and figure-eight") {
  const ValidationReport circle = validate_shape(DiscreteCurve::circle(64, 1.0));
  CHECK(circle.valid);
  CHECK(circle.injective);
  CHECK(circle.lipschitz);
  CHECK(circle.crossings.empty());
  CHECK(circle.min_vertex_angle == doctest::Approx(kPi - 2 * kPi / 64).epsilon(1e-12));

  PointArray eight(64, 2);
  for (int i = 0; i < 64; ++i) {
    const double t = 2 * kPi * i / 64;
    eight.row(i) << std::sin(2 * t), std::sin(t);
  }
  const ValidationReport r = validate_shape(eight);
  CHECK_FALSE(r.valid);
  CHECK_FALSE(r.injective);
  CHECK_FALSE(r.crossings.empty());
  CHECK(r.reason.find("intersect") != std::string::npos);
}

TEST_CASE("vertex-angle heuristic flags near-cusps") {
  PointArray spike(9, 2);
  spike << 0, 0, 0.25, 0, 0.5, 0, 0.75, 0, 1, 0, 1, 1, 0.5, 1, 0.5, 1000, 0, 1;
  // The apex at (0.5, 1000) has an interior angle of about 5e-4 rad.
  const ValidationReport r = validate_shape(spike);
  CHECK(r.min_vertex_angle < kMinVertexAngle);
  CHECK_FALSE(r.lipschitz);
  CHECK_FALSE(r.valid);
  CHECK_FALSE(r.reason.empty());
  CHECK(min_vertex_angle(spike) == r.min_vertex_angle);

  PointArray square(4, 2);
  square << 0, 0, 1, 0, 1, 1, 0, 1;
  CHECK(min_vertex_angle(square) == doctest::Approx(kPi / 2).epsilon(1e-15));
}

TEST_CASE("Hausdorff distance: concentric circles, shifts, identity") {
  for (int n : {16, 64, 256}) {
    const DiscreteCurve a = DiscreteCurve::circle(n, 1.0), b = DiscreteCurve::circle(n, 1.1);
    CHECK(std::abs(hausdorff_distance(a.points(), b.points()) - 0.1) <= 1e-10);
    CHECK_FALSE(shapes_equivalent(a, b, 0.05));
    CHECK(shapes_equivalent(a, b, 0.1 + 1e-9));
  }
  const int n = 1024;
  const DiscreteCurve c = DiscreteCurve::circle(n, 1.0), s = DiscreteCurve::circle(n, 1.0, Vec2(0.3, 0.0));
  // Polygon images deviate from the circle by at most the sagitta.
  const double sagitta = 1.0 - std::cos(kPi / n);
  CHECK(std::abs(hausdorff_distance(c.points(), s.points()) - 0.3) <= 2 * sagitta + 1e-12);
  CHECK(hausdorff_distance(c.points(), c.points()) == 0.0);

  // Same image with extra collinear vertices.
  PointArray doubled(2 * 32, 2);
  const DiscreteCurve d = DiscreteCurve::circle(32, 1.0);
  for (int i = 0; i < 32; ++i) {
    doubled.row(2 * i) = d.points().row(i);
    doubled.row(2 * i + 1) = 0.5 * (d.points().row(i) + d.points().row((i + 1) % 32));
  }
  CHECK(hausdorff_distance(d.points(), doubled) <= 1e-12);
}

TEST_CASE("Hausdorff is a pseudometric on random curves") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const DiscreteCurve a = testsupport::random_curve(rng, 48), b = testsupport::random_curve(rng, 64),
                        c = testsupport::random_curve(rng, 80);
    const double ab = hausdorff_distance(a.points(), b.points());
    const double ba = hausdorff_distance(b.points(), a.points());
    const double bc = hausdorff_distance(b.points(), c.points());
    const double ac = hausdorff_distance(a.points(), c.points());
    CHECK(std::abs(ab - ba) <= 1e-12);
    CHECK(ac <= ab + bc + 1e-12);
    CHECK(ab >= 0.0);
  }
}

TEST_CASE("equivalence is invariant under reparametrization") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    const DiscreteCurve c = testsupport::random_curve(rng, 96);
    CHECK(shapes_equivalent(c, c, 0.0));
    const DiscreteCurve rotated(rotate_index(c.points(), 17));
    CHECK(shapes_equivalent(c, rotated, 1e-12));
    CHECK(shapes_equivalent(rotated, c, 1e-12));
    PointArray rev = c.points().colwise().reverse();
    const DiscreteCurve reversed(rev);
    CHECK(reversed.was_reversed());
    CHECK(shapes_equivalent(c, reversed, 1e-12));
    const DiscreteCurve fine = resample(c, 200);
    const double edge = (c.points() - rotate_index(c.points(), 1)).rowwise().norm().maxCoeff();
    CHECK(shapes_equivalent(c, fine, edge));
    CHECK(shapes_equivalent(fine, c, edge));
  }
  const DiscreteCurve c64 = DiscreteCurve::circle(64, 1.0), c128 = DiscreteCurve::circle(128, 1.0);
  CHECK(shapes_equivalent(c64, c128, 2 * std::sin(kPi / 64)));
}
