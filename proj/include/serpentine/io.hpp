#pragma once

#include "serpentine/mesh.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace serpentine {

// ASCII mesh format.  Line 1: "nv nt nb"; nv lines "x y"; nt lines
// "v0 v1 v2"; nb lines "v0 v1 label" (1=INLET 2=WALL 3=OUTLET 4=INTERFACE).
// Coordinates are printed with "%.17g" so write/read round-trips bit-exactly.
void write_mesh(std::ostream& out, const TriMesh& mesh);
void write_mesh_file(const std::string& path, const TriMesh& mesh);
TriMesh read_mesh(std::istream& in);
TriMesh read_mesh_file(const std::string& path);

// Nodal coefficient file for a Lagrange field: "degree n" then n lines "%.17g".
void write_field_file(const std::string& path, int degree, const Eigen::VectorXd& coeffs);
void read_field_file(const std::string& path, int& degree, Eigen::VectorXd& coeffs);

// Legacy VTK unstructured-grid writers (visualization output only).
void write_vtk_point_scalars(const std::string& path, const TriMesh& mesh,
                             const std::string& name, const Eigen::VectorXd& vertex_values);
void write_vtk_cell_scalars(const std::string& path, const TriMesh& mesh,
                            const std::string& name, const Eigen::VectorXd& cell_values);

// CSV with a mandatory header; numeric cells formatted "%.8e" (ints as-is).
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header, bool echo_stdout);
  ~CsvWriter();
  void row(const std::vector<double>& values, const std::vector<int>& int_columns = {});

 private:
  struct Impl;
  Impl* impl_;
};

std::string format_real(double v);  // "%.8e"

}  // namespace serpentine
