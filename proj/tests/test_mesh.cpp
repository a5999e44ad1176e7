#include "serpentine/mesh.hpp"

#include "serpentine/geometry.hpp"
#include "serpentine/io.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

using namespace serpentine;

namespace {

const ChannelGeometry& paper_geometry() {
  static const ChannelGeometry geom = make_geometry(5.1, 0.5, 0.9, 0.8, 1.0);
  return geom;
}

LabeledPolygon unit_square() {
  LabeledPolygon poly;
  poly.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  poly.labels.assign(4, BoundaryLabel::Wall);
  return poly;
}

// Independent conformity oracle: count edge incidences by brute force.
void check_conforming(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      int a = t[(e + 1) % 3], b = t[(e + 2) % 3];
      if (a > b) std::swap(a, b);
      ++count[{a, b}];
    }
  }
  std::map<std::pair<int, int>, int> labels;
  for (const auto& be : mesh.boundary_edges) {
    int a = be.v0, b = be.v1;
    if (a > b) std::swap(a, b);
    labels[{a, b}] = static_cast<int>(be.label);
  }
  std::size_t n_boundary = 0;
  for (const auto& [edge, c] : count) {
    REQUIRE(c >= 1);
    REQUIRE(c <= 2);
    if (c == 1) {
      ++n_boundary;
      REQUIRE(labels.count(edge) == 1);
    } else {
      REQUIRE(labels.count(edge) == 0);
    }
  }
  CHECK(n_boundary == mesh.boundary_edges.size());
  for (const auto& t : mesh.triangles) {
    const Vec2 d1 = mesh.vertices[t[1]] - mesh.vertices[t[0]];
    const Vec2 d2 = mesh.vertices[t[2]] - mesh.vertices[t[0]];
    CHECK(d1.x() * d2.y() - d1.y() * d2.x() > 0.0);
  }
}

Vec2 random_point_in(const TriMesh& mesh, std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> cum(mesh.n_triangles());
  double acc = 0;
  for (int t = 0; t < mesh.n_triangles(); ++t) cum[t] = acc += mesh.area_tri[t];
  const double pick = uni(rng) * acc;
  const int t = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin());
  double a = uni(rng), b = uni(rng);
  if (a + b > 1) {
    a = 1 - a;
    b = 1 - b;
  }
  const auto& tri = mesh.triangles[t];
  return (1 - a - b) * mesh.vertices[tri[0]] + a * mesh.vertices[tri[1]] +
         b * mesh.vertices[tri[2]];
}

}  // namespace

TEST_CASE("unit square at target 0.5 meshes into labeled conforming triangles") {
  const TriMesh mesh = triangulate(unit_square(), 0.5);
  CHECK(mesh.n_triangles() >= 4);
  check_conforming(mesh);
  const MeshStats st = mesh_stats(mesh);
  CHECK(st.h_max <= 0.75);
  CHECK(st.h_max >= 0.25);
  CHECK(st.min_angle_deg >= 20.0);
}

TEST_CASE("channel meshes are conforming with exact interface coordinates") {
  const ChannelGeometry& g = paper_geometry();
  for (double xg : {0.1, 4.6, 4.8, 5.08}) {
    const InterfaceConfig iface = make_interface(g, xg);
    const TriMesh mesh = triangulate(reduced_domain_polygon(g, iface), 0.1);
    check_conforming(mesh);
    CHECK(mesh_stats(mesh).min_angle_deg >= 20.0);
    bool any_interface = false;
    for (const auto& be : mesh.boundary_edges) {
      if (be.label != BoundaryLabel::Interface) continue;
      any_interface = true;
      CHECK(mesh.vertices[be.v0].x() == xg);  // bitwise
      CHECK(mesh.vertices[be.v1].x() == xg);
    }
    CHECK(any_interface);
  }
}

TEST_CASE("quasi-uniform h_max sits in the documented band") {
  const ChannelGeometry& g = paper_geometry();
  const InterfaceConfig iface = make_interface(g, 0.1);
  const TriMesh mesh = triangulate(reduced_domain_polygon(g, iface), 0.0789);
  const MeshStats st = mesh_stats(mesh);
  CHECK(st.h_max >= 0.04);
  CHECK(st.h_max <= 0.12);
  CHECK(st.h_max >= 0.5 * 0.0789);
  CHECK(st.h_max <= 1.5 * 0.0789);
}

TEST_CASE("triangulate rejects unusable inputs") {
  CHECK_THROWS_AS(triangulate(unit_square(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(triangulate(unit_square(), 1.5), std::invalid_argument);
  LabeledPolygon slanted = unit_square();
  slanted.vertices[2] = {1.2, 1.0};
  CHECK_THROWS_AS(triangulate(slanted, 0.2), std::invalid_argument);
  // target above the narrowest passage (channel width R = 0.5)
  const ChannelGeometry& g = paper_geometry();
  CHECK_THROWS_AS(triangulate(full_domain_polygon(g), 0.7), std::invalid_argument);
  CHECK_NOTHROW(triangulate(full_domain_polygon(g), 0.45));
}

TEST_CASE("mesh stats on a single right triangle") {
  std::vector<Vec2> verts = {{0, 0}, {1, 0}, {0, 1}};
  std::vector<std::array<int, 3>> tris = {{0, 1, 2}};
  std::vector<TriMesh::BoundaryEdge> bed = {{0, 1, BoundaryLabel::Wall},
                                            {1, 2, BoundaryLabel::Wall},
                                            {2, 0, BoundaryLabel::Wall}};
  const TriMesh mesh = make_mesh(verts, tris, bed);
  const MeshStats st = mesh_stats(mesh);
  CHECK(st.n_vertices == 3);
  CHECK(st.n_triangles == 1);
  CHECK(st.h_max == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(st.min_angle_deg == doctest::Approx(45.0).epsilon(1e-12));
}

TEST_CASE("uniform refinement halves diameters and quadruples counts") {
  const TriMesh mesh = triangulate(unit_square(), 0.5);
  const TriMesh fine = uniform_refine(mesh, 2);
  check_conforming(fine);
  CHECK(fine.n_triangles() == 4 * mesh.n_triangles());
  CHECK(mesh_stats(fine).h_max ==
        doctest::Approx(0.5 * mesh_stats(mesh).h_max).epsilon(1e-12));
}

TEST_CASE("refinement to a size field") {
  const ChannelGeometry& g = paper_geometry();
  const InterfaceConfig iface = make_interface(g, 4.6);
  const TriMesh coarse = triangulate(reduced_domain_polygon(g, iface), 0.25);
  const double h0 = coarse.h_max();

  SUBCASE("size at h_max is a no-op") {
    const TriMesh same = refine_to_size_field(coarse, [&](const Vec2&) { return h0; });
    CHECK(same.n_triangles() == coarse.n_triangles());
    CHECK(same.n_vertices() == coarse.n_vertices());
  }

  SUBCASE("halving the size quadruples the count") {
    // exact on a uniform mesh, where every cell is congruent
    const TriMesh square = triangulate(unit_square(), 0.5);
    const double hs = square.h_max();
    const TriMesh fine_square =
        refine_to_size_field(square, [&](const Vec2&) { return hs / 2; });
    check_conforming(fine_square);
    CHECK(fine_square.n_triangles() == 4 * square.n_triangles());
    // approximate on the channel, whose cell sizes vary per segment
    const TriMesh fine = refine_to_size_field(coarse, [&](const Vec2&) { return h0 / 2; });
    check_conforming(fine);
    CHECK(fine.n_triangles() >= 3 * coarse.n_triangles());
    CHECK(fine.n_triangles() <= 5 * coarse.n_triangles());
    CHECK(fine.h_max() <= h0 / 2 * (1 + 1e-12));
  }

  SUBCASE("a local size field concentrates elements near the corner") {
    const Vec2 corner(5.1, 0.0);
    auto size = [&](const Vec2& x) { return (x - corner).norm() < 0.25 ? 0.03 : h0; };
    const TriMesh fine = refine_to_size_field(coarse, size);
    check_conforming(fine);
    const int added = fine.n_triangles() - coarse.n_triangles();
    REQUIRE(added > 0);
    int near = 0;
    for (int t = 0; t < fine.n_triangles(); ++t)
      near += (fine.centroid(t) - corner).norm() < g.width;
    CHECK(near >= added / 2);
  }

  SUBCASE("element budget is enforced") {
    CHECK_THROWS_AS(
        refine_to_size_field(
            coarse, [](const Vec2&) { return 1e-4; }, 1e-5, 5000),
        std::runtime_error);
  }

  SUBCASE("labels survive and the interface stays put") {
    const TriMesh fine = refine_to_size_field(coarse, [&](const Vec2&) { return h0 / 3; });
    // union of interface edges must tile {x_gamma} x [0, R]
    std::vector<std::pair<double, double>> spans;
    for (const auto& be : fine.boundary_edges) {
      if (be.label != BoundaryLabel::Interface) continue;
      CHECK(fine.vertices[be.v0].x() == 4.6);
      CHECK(fine.vertices[be.v1].x() == 4.6);
      spans.emplace_back(std::min(fine.vertices[be.v0].y(), fine.vertices[be.v1].y()),
                         std::max(fine.vertices[be.v0].y(), fine.vertices[be.v1].y()));
    }
    REQUIRE(!spans.empty());
    std::sort(spans.begin(), spans.end());
    CHECK(spans.front().first == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(spans.back().second == doctest::Approx(0.5).epsilon(1e-14));
    for (std::size_t i = 1; i < spans.size(); ++i)
      CHECK(spans[i].first == doctest::Approx(spans[i - 1].second).epsilon(1e-13));
  }

  SUBCASE("shape regularity survives repeated refinement") {
    TriMesh current = coarse;
    for (int round = 0; round < 3; ++round)
      current =
          refine_to_size_field(current, [&](const Vec2&) { return current.h_max() / 2; });
    CHECK(mesh_stats(current).min_angle_deg >= 15.0);
  }
}

TEST_CASE("point location agrees with the exhaustive scan") {
  const ChannelGeometry& g = paper_geometry();
  const InterfaceConfig iface = make_interface(g, 4.6);
  const TriMesh mesh = triangulate(reduced_domain_polygon(g, iface), 0.11);
  const PointLocator fast(mesh);
  std::mt19937 rng(23);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p = random_point_in(mesh, rng);
    const LocateResult slow = locate(mesh, p);
    const LocateResult quick = fast.locate(p);
    REQUIRE(slow.found());
    REQUIRE(quick.found());
    CHECK(slow.triangle == quick.triangle);
    CHECK(slow.barycentric.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(slow.barycentric.minCoeff() >= -1e-10);
  }
  // a centroid locates to its own triangle
  const int t = mesh.n_triangles() / 2;
  const LocateResult res = fast.locate(mesh.centroid(t));
  CHECK(res.triangle == t);
  CHECK(res.barycentric.x() == doctest::Approx(1.0 / 3).epsilon(1e-12));
  // a shared vertex picks the lowest incident triangle index
  const int v = mesh.triangles[t][0];
  const LocateResult at_vertex = locate(mesh, mesh.vertices[v]);
  REQUIRE(at_vertex.found());
  CHECK(at_vertex.barycentric.maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  int lowest = -1;
  for (int tt = 0; tt < mesh.n_triangles() && lowest < 0; ++tt) {
    const auto& tri = mesh.triangles[tt];
    if (tri[0] == v || tri[1] == v || tri[2] == v) lowest = tt;
  }
  CHECK(at_vertex.triangle == lowest);
  // outside points are rejected
  CHECK(!fast.locate({-1.0, -1.0}).found());
  CHECK(!locate(mesh, {0.0, 0.25}).found());  // left of the interface
}

TEST_CASE("mesh file round-trips bit-exactly") {
  const ChannelGeometry& g = paper_geometry();
  const InterfaceConfig iface = make_interface(g, 2.3);
  const TriMesh mesh = triangulate(reduced_domain_polygon(g, iface), 0.2);
  std::ostringstream first;
  write_mesh(first, mesh);
  std::istringstream in(first.str());
  const TriMesh back = read_mesh(in);
  REQUIRE(back.n_vertices() == mesh.n_vertices());
  REQUIRE(back.n_triangles() == mesh.n_triangles());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    CHECK(back.vertices[v].x() == mesh.vertices[v].x());
    CHECK(back.vertices[v].y() == mesh.vertices[v].y());
  }
  std::ostringstream second;
  write_mesh(second, back);
  CHECK(first.str() == second.str());
}
