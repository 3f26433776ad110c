#include "shapeopt/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

// Token reader that keeps track of line numbers for diagnostics.
class Tokens {
 public:
  explicit Tokens(std::istream& in) : in_(in) {}

  bool next(std::string& tok) {
    while (!(line_stream_ >> tok)) {
      std::string line;
      if (!std::getline(in_, line)) return false;
      ++line_;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line_stream_.clear();
      line_stream_.str(line);
    }
    return true;
  }

  std::string word(const char* what) {
    std::string tok;
    if (!next(tok)) fail(std::string("unexpected end of input, expected ") + what);
    return tok;
  }

  template <class T>
  T number(const char* what) {
    const std::string tok = word(what);
    std::istringstream ss(tok);
    T v{};
    ss >> v;
    if (ss.fail() || !ss.eof()) fail("expected " + std::string(what) + ", got '" + tok + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw InvalidArgument("line " + std::to_string(line_) + ": " + msg);
  }

 private:
  std::istream& in_;
  std::istringstream line_stream_;
  int line_ = 0;
};

}  // namespace

void write_mesh(std::ostream& out, const TriMesh& mesh, const MeshFields& fields) {
  out << std::setprecision(17);
  out << "nodes " << mesh.num_nodes() << '\n';
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    out << mesh.nodes()(i, 0) << ' ' << mesh.nodes()(i, 1) << ' ' << mesh.marks()[i] << '\n';
  }
  out << "triangles " << mesh.num_triangles() << '\n';
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    out << mesh.triangles()(t, 0) << ' ' << mesh.triangles()(t, 1) << ' ' << mesh.triangles()(t, 2) << '\n';
  }
  out << "gamma " << mesh.gamma_loop().size() << '\n';
  for (int v : mesh.gamma_loop()) out << v << '\n';
  for (const auto& [name, values] : fields.scalars) {
    if (values.size() != mesh.num_nodes()) throw InvalidArgument("field '" + name + "' has the wrong length");
    out << "scalar " << name << '\n';
    for (int i = 0; i < values.size(); ++i) out << values[i] << '\n';
  }
  for (const auto& [name, values] : fields.vectors) {
    if (values.rows() != mesh.num_nodes()) throw InvalidArgument("field '" + name + "' has the wrong length");
    out << "vector " << name << '\n';
    for (int i = 0; i < values.rows(); ++i) out << values(i, 0) << ' ' << values(i, 1) << '\n';
  }
}

TriMesh read_mesh(std::istream& in, MeshFields* fields) {
  Tokens tok(in);
  PointArray nodes;
  TriangleArray tris;
  std::vector<int> marks, loop;
  MeshFields parsed;
  bool have_nodes = false, have_tris = false;
  std::string key;
  while (tok.next(key)) {
    if (key == "nodes") {
      const int n = tok.number<int>("node count");
      if (n < 3) tok.fail("a mesh needs at least 3 nodes");
      nodes.resize(n, 2);
      marks.resize(n);
      for (int i = 0; i < n; ++i) {
        nodes(i, 0) = tok.number<double>("x");
        nodes(i, 1) = tok.number<double>("y");
        marks[i] = tok.number<int>("node mark");
      }
      have_nodes = true;
    } else if (key == "triangles") {
      const int m = tok.number<int>("triangle count");
      if (m < 1) tok.fail("a mesh needs at least one triangle");
      tris.resize(m, 3);
      for (int t = 0; t < m; ++t) {
        for (int k = 0; k < 3; ++k) tris(t, k) = tok.number<int>("vertex index");
      }
      have_tris = true;
    } else if (key == "gamma") {
      const int k = tok.number<int>("loop length");
      loop.resize(k);
      for (int i = 0; i < k; ++i) loop[i] = tok.number<int>("loop node");
    } else if (key == "scalar" || key == "vector") {
      if (!have_nodes) tok.fail("field before the node block");
      const std::string name = tok.word("field name");
      if (key == "scalar") {
        Eigen::VectorXd v(nodes.rows());
        for (int i = 0; i < v.size(); ++i) v[i] = tok.number<double>("field value");
        parsed.scalars[name] = std::move(v);
      } else {
        NodalVectorField v(nodes.rows(), 2);
        for (int i = 0; i < v.rows(); ++i) {
          v(i, 0) = tok.number<double>("field value");
          v(i, 1) = tok.number<double>("field value");
        }
        parsed.vectors[name] = std::move(v);
      }
    } else {
      tok.fail("unknown section '" + key + "'");
    }
  }
  if (!have_nodes || !have_tris) throw InvalidArgument("mesh input lacks a nodes or triangles block");
  const int n = static_cast<int>(nodes.rows());
  if (tris.minCoeff() < 0 || tris.maxCoeff() >= n) throw InvalidArgument("triangle references a missing node");
  for (int v : loop) {
    if (v < 0 || v >= n) throw InvalidArgument("interface loop references a missing node");
  }
  if (fields) *fields = std::move(parsed);
  return TriMesh(std::move(nodes), std::move(tris), std::move(marks), std::move(loop));
}

void write_vtk(std::ostream& out, const TriMesh& mesh, const MeshFields& fields) {
  const int n = mesh.num_nodes(), m = mesh.num_triangles();
  out << std::setprecision(17);
  out << "# vtk DataFile Version 3.0\nshapeopt mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << n << " double\n";
  for (int i = 0; i < n; ++i) out << mesh.nodes()(i, 0) << ' ' << mesh.nodes()(i, 1) << " 0\n";
  out << "CELLS " << m << ' ' << 4 * m << '\n';
  for (int t = 0; t < m; ++t) {
    out << "3 " << mesh.triangles()(t, 0) << ' ' << mesh.triangles()(t, 1) << ' ' << mesh.triangles()(t, 2) << '\n';
  }
  out << "CELL_TYPES " << m << '\n';
  for (int t = 0; t < m; ++t) out << "5\n";
  out << "POINT_DATA " << n << '\n';
  out << "SCALARS mark int 1\nLOOKUP_TABLE default\n";
  for (int i = 0; i < n; ++i) out << mesh.marks()[i] << '\n';
  for (const auto& [name, values] : fields.scalars) {
    if (values.size() != n) throw InvalidArgument("field '" + name + "' has the wrong length");
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < n; ++i) out << values[i] << '\n';
  }
  for (const auto& [name, values] : fields.vectors) {
    if (values.rows() != n) throw InvalidArgument("field '" + name + "' has the wrong length");
    out << "VECTORS " << name << " double\n";
    for (int i = 0; i < n; ++i) out << values(i, 0) << ' ' << values(i, 1) << " 0\n";
  }
}

void write_vtk_file(const std::string& path, const TriMesh& mesh, const MeshFields& fields) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_vtk(out, mesh, fields);
  if (!out) throw Error("write to " + path + " failed");
}

VtkData read_vtk(std::istream& in) {
  std::string line;
  for (int i = 0; i < 4; ++i) {
    if (!std::getline(in, line)) throw InvalidArgument("truncated VTK header");
  }
  if (line.find("UNSTRUCTURED_GRID") == std::string::npos) {
    throw InvalidArgument("only unstructured-grid VTK files are supported");
  }
  Tokens tok(in);
  VtkData data;
  int n = 0;
  std::string key;
  while (tok.next(key)) {
    if (key == "POINTS") {
      n = tok.number<int>("point count");
      tok.word("point type");
      data.points.resize(n, 2);
      for (int i = 0; i < n; ++i) {
        data.points(i, 0) = tok.number<double>("x");
        data.points(i, 1) = tok.number<double>("y");
        tok.number<double>("z");
      }
    } else if (key == "CELLS") {
      const int m = tok.number<int>("cell count");
      tok.number<int>("cell list size");
      data.triangles.resize(m, 3);
      for (int t = 0; t < m; ++t) {
        if (tok.number<int>("vertex count") != 3) tok.fail("only triangles are supported");
        for (int k = 0; k < 3; ++k) data.triangles(t, k) = tok.number<int>("vertex index");
      }
    } else if (key == "CELL_TYPES") {
      const int m = tok.number<int>("cell count");
      for (int t = 0; t < m; ++t) tok.number<int>("cell type");
    } else if (key == "POINT_DATA") {
      if (tok.number<int>("point count") != n) tok.fail("point data count mismatch");
    } else if (key == "SCALARS") {
      const std::string name = tok.word("field name");
      tok.word("field type");
      tok.word("component count");
      tok.word("LOOKUP_TABLE");
      tok.word("table name");
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i) v[i] = tok.number<double>("field value");
      data.fields.scalars[name] = std::move(v);
    } else if (key == "VECTORS") {
      const std::string name = tok.word("field name");
      tok.word("field type");
      NodalVectorField v(n, 2);
      for (int i = 0; i < n; ++i) {
        v(i, 0) = tok.number<double>("field value");
        v(i, 1) = tok.number<double>("field value");
        tok.number<double>("field value");
      }
      data.fields.vectors[name] = std::move(v);
    } else {
      tok.fail("unsupported VTK keyword '" + key + "'");
    }
  }
  return data;
}

VtkData read_vtk_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  return read_vtk(in);
}

}  // namespace shapeopt
