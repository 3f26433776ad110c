#pragma once

#include <iosfwd>
#include <string>

#include "shapeopt/curve.hpp"

namespace shapeopt {

// Text format: a line with N, then N lines "x y". Orientation is normalized on load.
DiscreteCurve read_curve(std::istream& in);
DiscreteCurve read_curve_file(const std::string& path);
void write_curve(std::ostream& out, const DiscreteCurve& c);
void write_curve_file(const std::string& path, const DiscreteCurve& c);

}  // namespace shapeopt
