#include "serpentine/fem.hpp"

#include "serpentine/geometry.hpp"
#include "serpentine/mesh.hpp"
#include "serpentine/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

using namespace serpentine;

namespace {

const ChannelGeometry& paper_geometry() {
  static const ChannelGeometry geom = make_geometry(5.1, 0.5, 0.9, 0.8, 1.0);
  return geom;
}

std::shared_ptr<const TriMesh> two_triangle_mesh() {
  std::vector<Vec2> verts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<std::array<int, 3>> tris = {{1, 2, 0}, {3, 0, 2}};
  std::vector<TriMesh::BoundaryEdge> bed = {{0, 1, BoundaryLabel::Wall},
                                            {1, 2, BoundaryLabel::Wall},
                                            {2, 3, BoundaryLabel::Wall},
                                            {3, 0, BoundaryLabel::Wall}};
  return std::make_shared<TriMesh>(make_mesh(verts, tris, bed));
}

std::shared_ptr<const TriMesh> single_triangle_mesh() {
  std::vector<Vec2> verts = {{0, 0}, {1, 0}, {0, 1}};
  std::vector<std::array<int, 3>> tris = {{0, 1, 2}};
  std::vector<TriMesh::BoundaryEdge> bed = {{0, 1, BoundaryLabel::Wall},
                                            {1, 2, BoundaryLabel::Wall},
                                            {2, 0, BoundaryLabel::Wall}};
  return std::make_shared<TriMesh>(make_mesh(verts, tris, bed));
}

// nodal interpolation of a callable
ScalarField interpolate(std::shared_ptr<const LagrangeSpace> space,
                        const std::function<double(const Vec2&)>& f) {
  Eigen::VectorXd coeffs(space->n_dofs);
  for (int d = 0; d < space->n_dofs; ++d) coeffs[d] = f(space->dof_points[d]);
  return ScalarField{std::move(space), std::move(coeffs)};
}

}  // namespace

TEST_CASE("dof counts for the supported degrees") {
  CHECK(build_space(single_triangle_mesh(), 1)->n_dofs == 3);
  CHECK(build_space(single_triangle_mesh(), 2)->n_dofs == 6);
  CHECK(build_space(single_triangle_mesh(), 3)->n_dofs == 10);
  CHECK(build_space(two_triangle_mesh(), 2)->n_dofs == 9);
  CHECK_THROWS_AS(build_space(single_triangle_mesh(), 4), std::invalid_argument);
  CHECK_THROWS_AS(build_space(single_triangle_mesh(), 0), std::invalid_argument);
}

TEST_CASE("shape functions form a partition of unity") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 1; k <= 3; ++k) {
    for (int i = 0; i < 50; ++i) {
      double a = uni(rng), b = uni(rng);
      if (a + b > 1) {
        a = 1 - a;
        b = 1 - b;
      }
      Eigen::VectorXd vals;
      shape_values(k, Eigen::Vector3d(1 - a - b, a, b), vals);
      CHECK(vals.sum() == doctest::Approx(1.0).epsilon(1e-13));
      // the three barycentric directional sums agree, so physical gradients
      // of the constant cancel through sum(grad lambda_c) = 0
      Eigen::MatrixX3d grads;
      shape_bary_gradients(k, Eigen::Vector3d(1 - a - b, a, b), grads);
      const Eigen::RowVector3d sums = grads.colwise().sum();
      CHECK(std::abs(sums[0] - sums[1]) < 1e-12);
      CHECK(std::abs(sums[1] - sums[2]) < 1e-12);
    }
  }
}

TEST_CASE("zero data produces the zero field") {
  auto space = build_space(two_triangle_mesh(), 2);
  std::map<BoundaryLabel, BoundaryValue> g;
  g[BoundaryLabel::Wall] = [](const Vec2&) { return 0.0; };
  const ScalarField u = solve_poisson(space, 0.0, g);
  CHECK(u.coeffs.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("quadratic data is reproduced exactly by P2") {
  // rectangle (0,1) x (0,R) with the profile on the whole boundary: the
  // exact solution S(y) lies in the space, so the Galerkin solution is its
  // interpolant
  const ChannelGeometry& g = paper_geometry();
  LabeledPolygon rect;
  rect.vertices = {{0, 0}, {1, 0}, {1, g.width}, {0, g.width}};
  rect.labels.assign(4, BoundaryLabel::Wall);
  auto mesh = std::make_shared<TriMesh>(triangulate(rect, 0.2));
  auto space = build_space(mesh, 2);
  std::map<BoundaryLabel, BoundaryValue> bc;
  bc[BoundaryLabel::Wall] = [&](const Vec2& p) { return poiseuille_profile(g, p.y()); };
  const ScalarField u = solve_poisson(space, source_term(g), bc);
  const ScalarField want =
      interpolate(space, [&](const Vec2& p) { return poiseuille_profile(g, p.y()); });
  CHECK((u.coeffs - want.coeffs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("gradients of interpolants") {
  auto space = build_space(two_triangle_mesh(), 2);
  const ChannelGeometry& g = paper_geometry();
  const ScalarField linear = interpolate(space, [](const Vec2& p) { return p.x(); });
  const ScalarField profile =
      interpolate(space, [&](const Vec2& p) { return poiseuille_profile(g, 0.4 * p.y()); });
  const ScalarField constant = interpolate(space, [](const Vec2&) { return 3.25; });
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int t = 0; t < 2; ++t) {
    for (int i = 0; i < 10; ++i) {
      double a = uni(rng), b = uni(rng);
      if (a + b > 1) {
        a = 1 - a;
        b = 1 - b;
      }
      const Eigen::Vector3d bary(1 - a - b, a, b);
      const Eigen::Vector2d gl = gradient_at(linear, t, bary);
      CHECK(gl.x() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(gl.y() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
      // physical point for the y-profile check
      const auto& tri = space->mesh->triangles[t];
      const Vec2 p = bary[0] * space->mesh->vertices[tri[0]] +
                     bary[1] * space->mesh->vertices[tri[1]] +
                     bary[2] * space->mesh->vertices[tri[2]];
      const Eigen::Vector2d gp = gradient_at(profile, t, bary);
      CHECK(gp.x() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
      CHECK(gp.y() ==
            doctest::Approx(0.4 * poiseuille_slope(g, 0.4 * p.y())).epsilon(1e-12));
      CHECK(gradient_at(constant, t, bary).norm() < 1e-12);
    }
  }
}

TEST_CASE("coupled solve: interface trace, hat residuals, solution bound") {
  const ChannelGeometry& g = paper_geometry();
  const InterfaceConfig iface = make_interface(g, 4.6);
  auto mesh = std::make_shared<TriMesh>(
      triangulate(reduced_domain_polygon(g, iface), g.width / 3.0));
  const CoupledSolution sol = solve_coupled(g, iface, mesh, 2);
  const LagrangeSpace& space = *sol.u_tilde.space;

  // interface dofs carry the closed-form trace exactly (imposed)
  int n_interface_dofs = 0;
  for (int d = 0; d < space.n_dofs; ++d) {
    if (space.dof_boundary_label[d] != static_cast<int>(BoundaryLabel::Interface)) continue;
    ++n_interface_dofs;
    CHECK(sol.u_tilde.coeffs[d] == poiseuille_profile(g, space.dof_points[d].y()));
  }
  CHECK(n_interface_dofs >= 3);

  // interior-vertex hat residuals vanish (the Galerkin identity that makes
  // the interior patch problems solvable)
  const auto& rule = triangle_rule(6);
  const double f = source_term(g);
  Eigen::VectorXd residual = Eigen::VectorXd::Zero(mesh->n_vertices());
  std::vector<Eigen::MatrixX3d> bg(rule.weights.size());
  for (int q = 0; q < rule.weights.size(); ++q)
    shape_bary_gradients(2, rule.points.col(q), bg[q]);
  double scale = 0.0;
  for (int t = 0; t < mesh->n_triangles(); ++t) {
    const auto g3 = space.p1_gradients(t);
    const auto& dofs = space.element_dofs[t];
    const auto& tri = mesh->triangles[t];
    for (int q = 0; q < rule.weights.size(); ++q) {
      const double w = rule.weights[q] * mesh->area_tri[t];
      Eigen::Vector2d grad_u = Eigen::Vector2d::Zero();
      for (int i = 0; i < space.dofs_per_element; ++i)
        grad_u += sol.u_tilde.coeffs[dofs[i]] * (bg[q].row(i) * g3).transpose();
      for (int v = 0; v < 3; ++v) {
        const double hat = rule.points(v, q);
        const Eigen::Vector2d hat_grad = g3.row(v).transpose();
        residual[tri[v]] += w * (f * hat - grad_u.dot(hat_grad));
        scale = std::max(scale, std::abs(w * f * hat));
      }
    }
  }
  std::vector<char> boundary_vertex(mesh->n_vertices(), 0);
  for (const auto& be : mesh->boundary_edges)
    boundary_vertex[be.v0] = boundary_vertex[be.v1] = 1;
  for (int v = 0; v < mesh->n_vertices(); ++v) {
    if (boundary_vertex[v]) continue;
    CHECK(std::abs(residual[v]) <= 1e-10 * std::max(scale, 1.0));
  }

  // the discrete solution stays within the measured bound of the continuous
  // one (max ~ 2.1 u_av in the wide outlet junction)
  CHECK(sol.u_tilde.coeffs.maxCoeff() <= 2.2 * g.u_average);
  CHECK(sol.u_tilde.coeffs.maxCoeff() >= 1.4 * g.u_average);
}

TEST_CASE("energy error vanishes against a nested interpolant of itself") {
  const ChannelGeometry& g = paper_geometry();
  const double xg = 4.6;
  const InterfaceConfig iface = make_interface(g, xg);
  auto mesh =
      std::make_shared<TriMesh>(triangulate(reduced_domain_polygon(g, iface), 0.2));
  const CoupledSolution sol = solve_coupled(g, iface, mesh, 2);

  // full-domain outline with the interface line inserted as collinear
  // vertices, so cells right of it coincide with the coupled mesh
  LabeledPolygon full = full_domain_polygon(g);
  // split the bottom wall (0,0)->(L,0) and the top wall (L+R,R)->(0,R)
  full.vertices.insert(full.vertices.begin() + 1, Vec2(xg, 0.0));
  full.labels.insert(full.labels.begin() + 1, BoundaryLabel::Wall);
  full.vertices.insert(full.vertices.begin() + 9, Vec2(xg, g.width));
  full.labels.insert(full.labels.begin() + 9, BoundaryLabel::Wall);
  auto ref_mesh = std::make_shared<TriMesh>(uniform_refine(triangulate(full, 0.2), 2));
  auto ref_space = build_space(ref_mesh, 2);

  const PointLocator locator(*mesh);
  Eigen::VectorXd coeffs(ref_space->n_dofs);
  for (int d = 0; d < ref_space->n_dofs; ++d) {
    const Vec2 p = ref_space->dof_points[d];
    if (p.x() <= xg && p.y() >= 0.0 && p.y() <= g.width) {
      coeffs[d] = poiseuille_profile(g, p.y());
    } else {
      const auto loc = locator.locate(p, 1e-9);
      REQUIRE(loc.found());
      coeffs[d] = value_at(sol.u_tilde, loc.triangle, loc.barycentric);
    }
  }
  const ScalarField reference{ref_space, std::move(coeffs)};
  CHECK(energy_norm_error(sol, reference) < 1e-10);
}

TEST_CASE("energy error is insensitive to quadrature refinement") {
  const ChannelGeometry& g = paper_geometry();
  const InterfaceConfig iface = make_interface(g, 4.6);
  auto mesh =
      std::make_shared<TriMesh>(triangulate(reduced_domain_polygon(g, iface), 0.12));
  const CoupledSolution sol = solve_coupled(g, iface, mesh, 2);
  auto ref_mesh = std::make_shared<TriMesh>(triangulate(full_domain_polygon(g), 0.03));
  const ScalarField ref = solve_reference(g, ref_mesh, 2);
  const double e4 = energy_norm_error(sol, ref, 4);
  const double e8 = energy_norm_error(sol, ref, 8);
  CHECK(std::abs(e4 - e8) / e8 < 0.005);
}
