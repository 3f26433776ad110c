#pragma once

#include <Eigen/Core>

namespace shapeopt {

using Vec2 = Eigen::Vector2d;

// Exact geometric predicates on double coordinates. A floating-point filter
// decides the sign whenever the rounding error bound allows it; otherwise the
// determinant is re-evaluated in exact rational arithmetic.

/// Sign of the signed area of (a, b, c): +1 counter-clockwise, -1 clockwise, 0 collinear.
int orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

/// +1 if d lies strictly inside the circle through the CCW triangle (a, b, c),
/// -1 if strictly outside, 0 if cocircular.
int incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

/// True if the closed segments [p1,p2] and [q1,q2] share at least one point.
bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2);

}  // namespace shapeopt
