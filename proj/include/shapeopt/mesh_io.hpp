#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include <Eigen/Core>

#include "shapeopt/fem.hpp"
#include "shapeopt/mesh.hpp"

namespace shapeopt {

struct MeshFields {
  std::map<std::string, Eigen::VectorXd> scalars;
  std::map<std::string, NodalVectorField> vectors;
};

// Native text format:
//   nodes N        then N lines "x y mark"
//   triangles M    then M lines "i j k"
//   gamma K        then K node indices, one per line
//   scalar NAME    then N values
//   vector NAME    then N lines "vx vy"
void write_mesh(std::ostream& out, const TriMesh& mesh, const MeshFields& fields = {});
TriMesh read_mesh(std::istream& in, MeshFields* fields = nullptr);

/// Legacy ASCII VTK unstructured grid; marks are written as a point scalar "mark".
void write_vtk(std::ostream& out, const TriMesh& mesh, const MeshFields& fields = {});
void write_vtk_file(const std::string& path, const TriMesh& mesh, const MeshFields& fields = {});

struct VtkData {
  PointArray points;
  TriangleArray triangles;
  MeshFields fields;  ///< includes "mark"
};
/// Reads the subset of legacy VTK produced by write_vtk.
VtkData read_vtk(std::istream& in);
VtkData read_vtk_file(const std::string& path);

}  // namespace shapeopt
