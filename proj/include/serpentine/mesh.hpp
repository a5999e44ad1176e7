#pragma once

#include "serpentine/geometry.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace serpentine {

// Conforming triangle mesh.  Triangles are stored counterclockwise with the
// bisection convention that the refinement edge of triangle (v0, v1, v2) is
// (v1, v2); meshes produced by triangulate()/refinement keep this invariant.
struct TriMesh {
  struct BoundaryEdge {
    int v0, v1;
    BoundaryLabel label;
  };

  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;

  // Topology and per-element data, filled by finalize().
  std::vector<std::array<int, 2>> edges;      // vertex pairs, lo < hi
  std::vector<std::array<int, 2>> edge_tris;  // adjacent triangles, second = -1 on boundary
  std::vector<int> edge_label;                // BoundaryLabel as int, -1 if interior
  std::vector<std::array<int, 3>> tri_edges;  // edge opposite local vertex i
  Eigen::VectorXd h_tri;                      // diameters
  Eigen::VectorXd area_tri;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  Vec2 centroid(int t) const;
  double h_max() const { return h_tri.size() ? h_tri.maxCoeff() : 0.0; }

  // Builds edge topology, per-element data, and verifies conformity
  // (every interior edge shared by exactly two triangles, every boundary edge
  // by one and labeled, all areas positive).  Throws on violation.
  void finalize();
};

TriMesh make_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                  std::vector<TriMesh::BoundaryEdge> boundary_edges);

// Quasi-uniform mesh of a rectilinear polygon built on a tensor background
// grid; boundary labels are inherited from the polygon edges.  Vertices on
// the polygon's vertical/horizontal lines carry exact coordinates.
TriMesh triangulate(const LabeledPolygon& polygon, double target_h);

// Newest-vertex bisection until every triangle satisfies
// h_T <= max(size(centroid_T), h_floor).  Labels are preserved.
TriMesh refine_to_size_field(const TriMesh& coarse,
                             const std::function<double(const Vec2&)>& size,
                             double h_floor = 1e-5, std::size_t max_elements = 2'000'000);

// `passes` sweeps bisecting every triangle; two passes halve every diameter.
TriMesh uniform_refine(const TriMesh& mesh, int passes = 2);

struct LocateResult {
  int triangle = -1;  // -1 = not found
  Eigen::Vector3d barycentric{0, 0, 0};
  bool found() const { return triangle >= 0; }
};

// Brute-force point location (lowest triangle index wins on ties).
LocateResult locate(const TriMesh& mesh, const Vec2& point, double tol = 1e-10);

// Bin-grid accelerated point location with the same tie-break.
class PointLocator {
 public:
  explicit PointLocator(const TriMesh& mesh);
  LocateResult locate(const Vec2& point, double tol = 1e-10) const;
  const TriMesh& mesh() const { return *mesh_; }

 private:
  const TriMesh* mesh_;
  double x0_, y0_, inv_dx_, inv_dy_;
  int nx_, ny_;
  std::vector<std::vector<int>> bins_;
};

struct MeshStats {
  int n_vertices = 0;
  int n_triangles = 0;
  double h_max = 0;
  double h_min = 0;
  double min_angle_deg = 0;
};

MeshStats mesh_stats(const TriMesh& mesh);

}  // namespace serpentine
