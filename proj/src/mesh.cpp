#include "serpentine/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace serpentine {

namespace {

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

// Subdivision of one axis: polygon breakpoints plus uniform interior points,
// endpoints kept bitwise exact.
std::vector<double> subdivide_axis(const std::vector<double>& breaks, double spacing) {
  std::vector<double> coords;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double a = breaks[s], b = breaks[s + 1];
    const double len = b - a;
    const int m = std::max(1, static_cast<int>(std::ceil(len / spacing - 1e-12)));
    coords.push_back(a);
    for (int j = 1; j < m; ++j) coords.push_back(a + len * j / m);
  }
  coords.push_back(breaks.back());
  return coords;
}

double min_subsegment(const std::vector<double>& breaks, double spacing) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double len = breaks[s + 1] - breaks[s];
    const int k = std::max(1, static_cast<int>(std::ceil(len / spacing - 1e-12)));
    m = std::min(m, len / k);
  }
  return m;
}

// Working form of a mesh during bisection sweeps.
struct BisectionState {
  std::vector<Vec2> verts;
  std::vector<std::array<int, 3>> tris;  // peak first, refinement edge = (v1, v2)
  std::unordered_map<std::uint64_t, int> boundary_label;

  explicit BisectionState(const TriMesh& mesh)
      : verts(mesh.vertices), tris(mesh.triangles) {
    for (const auto& be : mesh.boundary_edges)
      boundary_label[edge_key(be.v0, be.v1)] = static_cast<int>(be.label);
  }

  TriMesh finish() const {
    std::vector<TriMesh::BoundaryEdge> bedges;
    bedges.reserve(boundary_label.size());
    // Recover labeled edges in deterministic order by scanning triangles.
    std::unordered_set<std::uint64_t> seen;
    for (const auto& t : tris) {
      for (int e = 0; e < 3; ++e) {
        const int a = t[(e + 1) % 3], b = t[(e + 2) % 3];
        const auto key = edge_key(a, b);
        auto it = boundary_label.find(key);
        if (it != boundary_label.end() && seen.insert(key).second)
          bedges.push_back({std::min(a, b), std::max(a, b),
                            static_cast<BoundaryLabel>(it->second)});
      }
    }
    return make_mesh(verts, tris, bedges);
  }

  double tri_h(int t) const {
    const Vec2& a = verts[tris[t][0]];
    const Vec2& b = verts[tris[t][1]];
    const Vec2& c = verts[tris[t][2]];
    return std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
  }

  Vec2 tri_centroid(int t) const {
    return (verts[tris[t][0]] + verts[tris[t][1]] + verts[tris[t][2]]) / 3.0;
  }

  // One conforming bisection sweep over the marked refinement edges.
  // Returns the new element count.
  std::size_t split_marked(std::unordered_set<std::uint64_t>& marked) {
    // Closure: a triangle with any marked edge must have its refinement
    // edge marked as well.
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& t : tris) {
        const auto kr = edge_key(t[1], t[2]);
        if (marked.count(kr)) continue;
        if (marked.count(edge_key(t[0], t[1])) || marked.count(edge_key(t[2], t[0]))) {
          marked.insert(kr);
          changed = true;
        }
      }
    }

    // Midpoints, created in deterministic triangle/edge order.
    std::unordered_map<std::uint64_t, int> midpoint;
    midpoint.reserve(marked.size());
    auto ensure_midpoint = [&](int a, int b) {
      const auto key = edge_key(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int id = static_cast<int>(verts.size());
      verts.push_back(0.5 * (verts[a] + verts[b]));
      midpoint.emplace(key, id);
      auto bl = boundary_label.find(key);
      if (bl != boundary_label.end()) {
        const int label = bl->second;
        boundary_label.erase(bl);
        boundary_label[edge_key(a, id)] = label;
        boundary_label[edge_key(id, b)] = label;
      }
      return id;
    };

    std::vector<std::array<int, 3>> out;
    out.reserve(tris.size() * 2);
    for (const auto& t : tris) {
      const int p = t[0], a = t[1], b = t[2];
      if (!marked.count(edge_key(a, b))) {
        out.push_back(t);
        continue;
      }
      const int m = ensure_midpoint(a, b);
      // children (m,p,a) and (m,b,p); grandchildren if their own refinement
      // edges (p,a) / (b,p) are marked too
      if (marked.count(edge_key(p, a))) {
        const int ml = ensure_midpoint(p, a);
        out.push_back({ml, m, p});
        out.push_back({ml, a, m});
      } else {
        out.push_back({m, p, a});
      }
      if (marked.count(edge_key(b, p))) {
        const int mr = ensure_midpoint(b, p);
        out.push_back({mr, m, b});
        out.push_back({mr, p, m});
      } else {
        out.push_back({m, b, p});
      }
    }
    tris.swap(out);
    return tris.size();
  }
};

}  // namespace

Vec2 TriMesh::centroid(int t) const {
  return (vertices[triangles[t][0]] + vertices[triangles[t][1]] + vertices[triangles[t][2]]) /
         3.0;
}

void TriMesh::finalize() {
  const int nt = n_triangles();
  edges.clear();
  edge_tris.clear();
  edge_label.clear();
  tri_edges.assign(nt, {-1, -1, -1});
  h_tri.resize(nt);
  area_tri.resize(nt);

  std::unordered_map<std::uint64_t, int> edge_index;
  edge_index.reserve(static_cast<std::size_t>(nt) * 2);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = triangles[t];
    const Vec2& p0 = vertices[tri[0]];
    const Vec2& p1 = vertices[tri[1]];
    const Vec2& p2 = vertices[tri[2]];
    const double area = signed_area(p0, p1, p2);
    if (!(area > 0.0)) throw std::runtime_error("TriMesh: non-positive triangle area");
    area_tri[t] = area;
    h_tri[t] = std::max({(p0 - p1).norm(), (p1 - p2).norm(), (p2 - p0).norm()});
    for (int e = 0; e < 3; ++e) {
      const int a = tri[(e + 1) % 3], b = tri[(e + 2) % 3];
      const auto key = edge_key(a, b);
      auto [it, inserted] = edge_index.try_emplace(key, static_cast<int>(edges.size()));
      if (inserted) {
        edges.push_back({std::min(a, b), std::max(a, b)});
        edge_tris.push_back({t, -1});
      } else {
        auto& adj = edge_tris[it->second];
        if (adj[1] != -1) throw std::runtime_error("TriMesh: edge shared by >2 triangles");
        adj[1] = t;
      }
      tri_edges[t][e] = it->second;
    }
  }

  edge_label.assign(edges.size(), -1);
  for (const auto& be : boundary_edges) {
    auto it = edge_index.find(edge_key(be.v0, be.v1));
    if (it == edge_index.end())
      throw std::runtime_error("TriMesh: labeled edge is not a mesh edge");
    if (edge_tris[it->second][1] != -1)
      throw std::runtime_error("TriMesh: labeled edge is interior");
    edge_label[it->second] = static_cast<int>(be.label);
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edge_tris[e][1] == -1 && edge_label[e] < 0)
      throw std::runtime_error("TriMesh: boundary edge without label");
  }
}

TriMesh make_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                  std::vector<TriMesh::BoundaryEdge> boundary_edges) {
  TriMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  mesh.boundary_edges = std::move(boundary_edges);
  mesh.finalize();
  return mesh;
}

TriMesh triangulate(const LabeledPolygon& polygon, double target_h) {
  const auto& pv = polygon.vertices;
  const std::size_t n = pv.size();
  if (n < 4) throw std::invalid_argument("triangulate: degenerate polygon");
  if (!(target_h > 0)) throw std::invalid_argument("triangulate: target_h must be positive");
  if (polygon.labels.size() != n)
    throw std::invalid_argument("triangulate: one label per polygon edge required");

  std::vector<double> xb, yb;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = pv[i];
    const Vec2& b = pv[(i + 1) % n];
    const bool vertical = a.x() == b.x();
    const bool horizontal = a.y() == b.y();
    if (vertical == horizontal)
      throw std::invalid_argument("triangulate: polygon edges must be axis-aligned");
    xb.push_back(a.x());
    yb.push_back(a.y());
  }
  auto uniquify = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  uniquify(xb);
  uniquify(yb);
  if (xb.size() < 2 || yb.size() < 2)
    throw std::invalid_argument("triangulate: degenerate polygon");

  // Narrowest passage of the domain: the smallest contiguous inside extent
  // over break-grid rows and columns.  The mesh cannot resolve the geometry
  // with cells larger than that.
  const int ncx = static_cast<int>(xb.size()) - 1;
  const int ncy = static_cast<int>(yb.size()) - 1;
  std::vector<char> inside(static_cast<std::size_t>(ncx) * ncy, 0);
  for (int i = 0; i < ncx; ++i)
    for (int j = 0; j < ncy; ++j) {
      const Vec2 c(0.5 * (xb[i] + xb[i + 1]), 0.5 * (yb[j] + yb[j + 1]));
      inside[static_cast<std::size_t>(i) * ncy + j] = point_in_polygon(pv, c) ? 1 : 0;
    }
  double passage = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ncx; ++i) {
    double run = 0;
    for (int j = 0; j <= ncy; ++j) {
      if (j < ncy && inside[static_cast<std::size_t>(i) * ncy + j]) {
        run += yb[j + 1] - yb[j];
      } else if (run > 0) {
        passage = std::min(passage, run);
        run = 0;
      }
    }
  }
  for (int j = 0; j < ncy; ++j) {
    double run = 0;
    for (int i = 0; i <= ncx; ++i) {
      if (i < ncx && inside[static_cast<std::size_t>(i) * ncy + j]) {
        run += xb[i + 1] - xb[i];
      } else if (run > 0) {
        passage = std::min(passage, run);
        run = 0;
      }
    }
  }
  if (!std::isfinite(passage)) throw std::invalid_argument("triangulate: empty polygon");
  if (target_h > passage * (1.0 + 1e-12))
    throw std::invalid_argument("triangulate: target_h exceeds the narrowest passage");

  // Cell spacing: target diameters are edge lengths * sqrt(2); cap the
  // spacing so cell aspect ratios stay below 2.4 (min angle >= 22.6 deg).
  const double s = target_h / std::sqrt(2.0);
  const double p = std::min(min_subsegment(xb, s), min_subsegment(yb, s));
  const double cap = std::min(s, 2.4 * p);
  const std::vector<double> xs = subdivide_axis(xb, cap);
  const std::vector<double> ys = subdivide_axis(yb, cap);

  const int nx = static_cast<int>(xs.size());
  const int ny = static_cast<int>(ys.size());
  std::vector<int> vid(static_cast<std::size_t>(nx) * ny, -1);
  std::vector<Vec2> verts;
  std::vector<std::array<int, 3>> tris;
  auto vertex_at = [&](int i, int j) {
    int& id = vid[static_cast<std::size_t>(i) * ny + j];
    if (id < 0) {
      id = static_cast<int>(verts.size());
      verts.emplace_back(xs[i], ys[j]);
    }
    return id;
  };

  for (int i = 0; i + 1 < nx; ++i) {
    for (int j = 0; j + 1 < ny; ++j) {
      const Vec2 c(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]));
      if (!point_in_polygon(pv, c)) continue;
      const int v00 = vertex_at(i, j);
      const int v10 = vertex_at(i + 1, j);
      const int v11 = vertex_at(i + 1, j + 1);
      const int v01 = vertex_at(i, j + 1);
      // split along the (v00, v11) diagonal; peaks at the right angles
      tris.push_back({v10, v11, v00});
      tris.push_back({v01, v00, v11});
    }
  }
  if (tris.empty()) throw std::invalid_argument("triangulate: empty polygon");

  // Label boundary edges by matching them to polygon edges.
  std::unordered_map<std::uint64_t, int> edge_count;
  for (const auto& t : tris)
    for (int e = 0; e < 3; ++e) edge_count[edge_key(t[(e + 1) % 3], t[(e + 2) % 3])]++;
  const double tol = 1e-12 * (std::abs(xb.back() - xb.front()) + std::abs(yb.back() - yb.front()));
  std::vector<TriMesh::BoundaryEdge> bedges;
  for (const auto& t : tris) {
    for (int e = 0; e < 3; ++e) {
      const int a = t[(e + 1) % 3], b = t[(e + 2) % 3];
      if (edge_count[edge_key(a, b)] != 1) continue;  // boundary edges occur once
      const Vec2& pa = verts[a];
      const Vec2& pb = verts[b];
      int label = -1;
      for (std::size_t k = 0; k < n && label < 0; ++k) {
        const Vec2& qa = pv[k];
        const Vec2& qb = pv[(k + 1) % n];
        const Vec2 d = qb - qa;
        const double len = d.norm();
        const Vec2 u = d / len;
        const double ca = u.x() * (pa.y() - qa.y()) - u.y() * (pa.x() - qa.x());
        const double cb = u.x() * (pb.y() - qa.y()) - u.y() * (pb.x() - qa.x());
        if (std::abs(ca) > tol || std::abs(cb) > tol) continue;
        const double ta = u.dot(pa - qa), tb = u.dot(pb - qa);
        if (ta >= -tol && ta <= len + tol && tb >= -tol && tb <= len + tol)
          label = static_cast<int>(polygon.labels[k]);
      }
      if (label < 0) throw std::runtime_error("triangulate: unmatched boundary edge");
      bedges.push_back({a, b, static_cast<BoundaryLabel>(label)});
    }
  }

  return make_mesh(std::move(verts), std::move(tris), std::move(bedges));
}

TriMesh refine_to_size_field(const TriMesh& coarse,
                             const std::function<double(const Vec2&)>& size, double h_floor,
                             std::size_t max_elements) {
  BisectionState state(coarse);
  for (int pass = 0; pass < 64; ++pass) {
    std::unordered_set<std::uint64_t> marked;
    for (std::size_t t = 0; t < state.tris.size(); ++t) {
      const double target = size(state.tri_centroid(static_cast<int>(t)));
      if (!(target > 0)) throw std::invalid_argument("refine_to_size_field: size must be > 0");
      const double h = state.tri_h(static_cast<int>(t));
      if (h > std::max(target, h_floor) * (1.0 + 1e-12))
        marked.insert(edge_key(state.tris[t][1], state.tris[t][2]));
    }
    if (marked.empty()) return state.finish();
    const std::size_t count = state.split_marked(marked);
    if (count > max_elements)
      throw std::runtime_error("refine_to_size_field: element budget exceeded");
  }
  throw std::runtime_error("refine_to_size_field: did not reach the size field in 64 passes");
}

TriMesh uniform_refine(const TriMesh& mesh, int passes) {
  BisectionState state(mesh);
  for (int p = 0; p < passes; ++p) {
    std::unordered_set<std::uint64_t> marked;
    for (const auto& t : state.tris) marked.insert(edge_key(t[1], t[2]));
    state.split_marked(marked);
  }
  return state.finish();
}

namespace {

bool barycentric_in(const TriMesh& mesh, int t, const Vec2& p, double tol,
                    Eigen::Vector3d& bary) {
  const auto& tri = mesh.triangles[t];
  const Vec2& a = mesh.vertices[tri[0]];
  const Vec2& b = mesh.vertices[tri[1]];
  const Vec2& c = mesh.vertices[tri[2]];
  const double det = 2.0 * mesh.area_tri[t];
  const double l1 = ((p.x() - a.x()) * (c.y() - a.y()) - (p.y() - a.y()) * (c.x() - a.x())) / det;
  const double l2 = ((b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x())) / det;
  const double l0 = 1.0 - l1 - l2;
  bary << l0, l1, l2;
  return l0 >= -tol && l1 >= -tol && l2 >= -tol;
}

}  // namespace

LocateResult locate(const TriMesh& mesh, const Vec2& point, double tol) {
  LocateResult res;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    if (barycentric_in(mesh, t, point, tol, res.barycentric)) {
      res.triangle = t;
      return res;
    }
  }
  res.triangle = -1;
  return res;
}

PointLocator::PointLocator(const TriMesh& mesh) : mesh_(&mesh) {
  double x1 = std::numeric_limits<double>::lowest(), y1 = x1;
  x0_ = std::numeric_limits<double>::max();
  y0_ = x0_;
  for (const auto& v : mesh.vertices) {
    x0_ = std::min(x0_, v.x());
    y0_ = std::min(y0_, v.y());
    x1 = std::max(x1, v.x());
    y1 = std::max(y1, v.y());
  }
  Eigen::VectorXd h = mesh.h_tri;
  std::nth_element(h.data(), h.data() + h.size() / 2, h.data() + h.size());
  const double span = std::max(x1 - x0_, y1 - y0_);
  const double bin = std::max(2.0 * h[h.size() / 2], span / 4096.0);
  nx_ = std::max(1, static_cast<int>(std::ceil((x1 - x0_) / bin)));
  ny_ = std::max(1, static_cast<int>(std::ceil((y1 - y0_) / bin)));
  inv_dx_ = nx_ / std::max(x1 - x0_, 1e-300);
  inv_dy_ = ny_ / std::max(y1 - y0_, 1e-300);
  bins_.resize(static_cast<std::size_t>(nx_) * ny_);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    double tx0 = std::numeric_limits<double>::max(), ty0 = tx0;
    double tx1 = std::numeric_limits<double>::lowest(), ty1 = tx1;
    for (int v : mesh.triangles[t]) {
      tx0 = std::min(tx0, mesh.vertices[v].x());
      ty0 = std::min(ty0, mesh.vertices[v].y());
      tx1 = std::max(tx1, mesh.vertices[v].x());
      ty1 = std::max(ty1, mesh.vertices[v].y());
    }
    const int i0 = std::clamp(static_cast<int>((tx0 - x0_) * inv_dx_), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((tx1 - x0_) * inv_dx_), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((ty0 - y0_) * inv_dy_), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((ty1 - y0_) * inv_dy_), 0, ny_ - 1);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j)
        bins_[static_cast<std::size_t>(i) * ny_ + j].push_back(t);
  }
}

LocateResult PointLocator::locate(const Vec2& point, double tol) const {
  LocateResult res;
  const int i = std::clamp(static_cast<int>((point.x() - x0_) * inv_dx_), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>((point.y() - y0_) * inv_dy_), 0, ny_ - 1);
  for (int t : bins_[static_cast<std::size_t>(i) * ny_ + j]) {
    if (barycentric_in(*mesh_, t, point, tol, res.barycentric)) {
      res.triangle = t;
      return res;
    }
  }
  res.triangle = -1;
  return res;
}

MeshStats mesh_stats(const TriMesh& mesh) {
  MeshStats st;
  st.n_vertices = mesh.n_vertices();
  st.n_triangles = mesh.n_triangles();
  if (mesh.n_triangles() == 0) return st;
  st.h_max = mesh.h_tri.maxCoeff();
  st.h_min = mesh.h_tri.minCoeff();
  double min_angle = std::numeric_limits<double>::max();
  for (const auto& tri : mesh.triangles) {
    for (int v = 0; v < 3; ++v) {
      const Vec2& a = mesh.vertices[tri[v]];
      const Vec2 d1 = (mesh.vertices[tri[(v + 1) % 3]] - a).normalized();
      const Vec2 d2 = (mesh.vertices[tri[(v + 2) % 3]] - a).normalized();
      min_angle = std::min(min_angle, std::acos(std::clamp(d1.dot(d2), -1.0, 1.0)));
    }
  }
  st.min_angle_deg = min_angle * 180.0 / M_PI;
  return st;
}

}  // namespace serpentine
