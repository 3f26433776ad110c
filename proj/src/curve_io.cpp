#include "shapeopt/curve_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

// Reads the next non-blank, non-comment line.
bool next_line(std::istream& in, std::string& line, int& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

DiscreteCurve read_curve(std::istream& in) {
  std::string line;
  int lineno = 0;
  if (!next_line(in, line, lineno)) throw InvalidArgument("curve file is empty");
  long n = 0;
  {
    std::istringstream ls(line);
    std::string rest;
    if (!(ls >> n) || (ls >> rest) || n <= 0) {
      throw InvalidArgument("curve file line " + std::to_string(lineno) +
                            ": expected a positive sample count");
    }
  }
  PointArray p(n, 2);
  for (long i = 0; i < n; ++i) {
    if (!next_line(in, line, lineno)) {
      throw InvalidArgument("curve file ended after " + std::to_string(i) + " of " +
                            std::to_string(n) + " points");
    }
    std::istringstream ls(line);
    double x = 0.0;
    double y = 0.0;
    std::string rest;
    if (!(ls >> x >> y) || (ls >> rest)) {
      throw InvalidArgument("curve file line " + std::to_string(lineno) + ": expected \"x y\"");
    }
    p(i, 0) = x;
    p(i, 1) = y;
  }
  return DiscreteCurve(std::move(p));
}

DiscreteCurve read_curve_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open curve file " + path);
  return read_curve(in);
}

void write_curve(std::ostream& out, const DiscreteCurve& c) {
  out << c.size() << '\n';
  char buf[96];
  for (int i = 0; i < c.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", c.points()(i, 0), c.points()(i, 1));
    out << buf;
  }
}

void write_curve_file(const std::string& path, const DiscreteCurve& c) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write curve file " + path);
  write_curve(out, c);
}

}  // namespace shapeopt
