#include "serpentine/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace serpentine {

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

}  // namespace

void write_mesh(std::ostream& out, const TriMesh& mesh) {
  out << mesh.n_vertices() << ' ' << mesh.n_triangles() << ' ' << mesh.boundary_edges.size()
      << '\n';
  for (const auto& v : mesh.vertices) out << g17(v.x()) << ' ' << g17(v.y()) << '\n';
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& b : mesh.boundary_edges)
    out << b.v0 << ' ' << b.v1 << ' ' << static_cast<int>(b.label) << '\n';
}

void write_mesh_file(const std::string& path, const TriMesh& mesh) {
  auto out = open_out(path);
  write_mesh(out, mesh);
}

TriMesh read_mesh(std::istream& in) {
  std::size_t nv = 0, nt = 0, nb = 0;
  if (!(in >> nv >> nt >> nb)) throw std::runtime_error("mesh file: bad header");
  std::vector<Vec2> verts(nv);
  for (auto& v : verts)
    if (!(in >> v.x() >> v.y())) throw std::runtime_error("mesh file: bad vertex line");
  std::vector<std::array<int, 3>> tris(nt);
  for (auto& t : tris)
    if (!(in >> t[0] >> t[1] >> t[2])) throw std::runtime_error("mesh file: bad triangle line");
  std::vector<TriMesh::BoundaryEdge> bedges(nb);
  for (auto& b : bedges) {
    int label = 0;
    if (!(in >> b.v0 >> b.v1 >> label)) throw std::runtime_error("mesh file: bad edge line");
    if (label < 1 || label > 4) throw std::runtime_error("mesh file: unknown label");
    b.label = static_cast<BoundaryLabel>(label);
  }
  return make_mesh(std::move(verts), std::move(tris), std::move(bedges));
}

TriMesh read_mesh_file(const std::string& path) {
  auto in = open_in(path);
  return read_mesh(in);
}

void write_field_file(const std::string& path, int degree, const Eigen::VectorXd& coeffs) {
  auto out = open_out(path);
  out << degree << ' ' << coeffs.size() << '\n';
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) out << g17(coeffs[i]) << '\n';
}

void read_field_file(const std::string& path, int& degree, Eigen::VectorXd& coeffs) {
  auto in = open_in(path);
  Eigen::Index n = 0;
  if (!(in >> degree >> n)) throw std::runtime_error("field file: bad header");
  coeffs.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(in >> coeffs[i])) throw std::runtime_error("field file: bad value line");
}

namespace {

void write_vtk_grid(std::ostream& out, const TriMesh& mesh) {
  out << "# vtk DataFile Version 3.0\nserpentine output\nASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const auto& v : mesh.vertices) out << g17(v.x()) << ' ' << g17(v.y()) << " 0\n";
  out << "CELLS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles() << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.n_triangles() << '\n';
  for (int t = 0; t < mesh.n_triangles(); ++t) out << "5\n";
}

}  // namespace

void write_vtk_point_scalars(const std::string& path, const TriMesh& mesh,
                             const std::string& name, const Eigen::VectorXd& vertex_values) {
  if (vertex_values.size() != mesh.n_vertices())
    throw std::invalid_argument("write_vtk_point_scalars: size mismatch");
  auto out = open_out(path);
  write_vtk_grid(out, mesh);
  out << "POINT_DATA " << mesh.n_vertices() << '\n';
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (Eigen::Index i = 0; i < vertex_values.size(); ++i) out << g17(vertex_values[i]) << '\n';
}

void write_vtk_cell_scalars(const std::string& path, const TriMesh& mesh,
                            const std::string& name, const Eigen::VectorXd& cell_values) {
  if (cell_values.size() != mesh.n_triangles())
    throw std::invalid_argument("write_vtk_cell_scalars: size mismatch");
  auto out = open_out(path);
  write_vtk_grid(out, mesh);
  out << "CELL_DATA " << mesh.n_triangles() << '\n';
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (Eigen::Index i = 0; i < cell_values.size(); ++i) out << g17(cell_values[i]) << '\n';
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  return buf;
}

struct CsvWriter::Impl {
  std::ofstream file;
  bool echo;
};

CsvWriter::CsvWriter(const std::string& path, const std::string& header, bool echo_stdout)
    : impl_(new Impl{open_out(path), echo_stdout}) {
  impl_->file << header << '\n';
  if (impl_->echo) std::cout << header << '\n';
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::row(const std::vector<double>& values, const std::vector<int>& int_columns) {
  std::ostringstream line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line << ',';
    const bool integral =
        std::find(int_columns.begin(), int_columns.end(), static_cast<int>(i)) !=
        int_columns.end();
    if (integral)
      line << static_cast<long long>(values[i]);
    else
      line << format_real(values[i]);
  }
  impl_->file << line.str() << '\n';
  if (impl_->echo) std::cout << line.str() << '\n';
}

}  // namespace serpentine
