#include "serpentine/geometry.hpp"

#include "serpentine/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace serpentine;

namespace {

const ChannelGeometry& paper_geometry() {
  static const ChannelGeometry geom = make_geometry(5.1, 0.5, 0.9, 0.8, 1.0);
  return geom;
}

}  // namespace

TEST_CASE("paper geometry has the documented outline") {
  const ChannelGeometry& g = paper_geometry();
  CHECK(g.epsilon == 0.5 / 5.1);
  const auto& poly = g.boundary;
  REQUIRE(poly.vertices.size() == 9);
  const Vec2 expected[9] = {{0, 0},        {5.1, 0},     {5.1, -0.9},
                            {4.8, -0.9},   {4.8, -1.4},  {5.6, -1.4},
                            {5.6, -0.9},   {5.6, 0.5},   {0, 0.5}};
  for (int i = 0; i < 9; ++i) {
    CHECK(poly.vertices[i].x() == doctest::Approx(expected[i].x()).epsilon(1e-15));
    CHECK(poly.vertices[i].y() == doctest::Approx(expected[i].y()).epsilon(1e-15));
  }
  // outlet between (5.6,-1.4) and (5.6,-0.9), inlet between (0,0.5) and (0,0)
  for (int i = 0; i < 9; ++i) {
    const BoundaryLabel want = i == 5   ? BoundaryLabel::Outlet
                               : i == 8 ? BoundaryLabel::Inlet
                                        : BoundaryLabel::Wall;
    CHECK(poly.labels[i] == want);
  }
  // the outlet datum spans a full profile: y + W + R covers (0, R)
  CHECK(poly.vertices[5].y() + g.bend_straight + g.width == doctest::Approx(0.0));
  CHECK(poly.vertices[6].y() + g.bend_straight + g.width == doctest::Approx(g.width));

  // counterclockwise and simple enough to have positive area
  double twice_area = 0;
  for (int i = 0; i < 9; ++i) {
    const Vec2& a = poly.vertices[i];
    const Vec2& b = poly.vertices[(i + 1) % 9];
    twice_area += a.x() * b.y() - b.x() * a.y();
  }
  CHECK(twice_area / 2 == doctest::Approx(3.65).epsilon(1e-14));
}

TEST_CASE("degenerate parameters are rejected") {
  CHECK_NOTHROW(make_geometry(1, 1, 1, 2, 0.0));  // L_out == L + R is the limit case
  CHECK(make_geometry(1, 1, 1, 2, 0).epsilon == 1.0);
  CHECK_THROWS_AS(make_geometry(5.1, 0.5, 0.9, 0.4, 1.0), std::invalid_argument);  // L_out <= R
  CHECK_THROWS_AS(make_geometry(-1, 0.5, 0.9, 0.8, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_geometry(5.1, 0.5, 0.9, 0.8, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(make_interface(paper_geometry(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_interface(paper_geometry(), 5.1), std::invalid_argument);
}

TEST_CASE("profile vanishes at the walls and peaks mid-channel") {
  const ChannelGeometry& g = paper_geometry();
  CHECK(poiseuille_profile(g, 0.0) == 0.0);
  CHECK(poiseuille_profile(g, g.width) == 0.0);
  CHECK(poiseuille_profile(g, 0.25) == doctest::Approx(1.5));
}

TEST_CASE("profile average equals u_av for random parameters") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uni(0.1, 4.0);
  const EdgeQuadRule& rule = edge_rule(3);
  for (int trial = 0; trial < 20; ++trial) {
    const double R = uni(rng), uav = uni(rng) - 2.0;
    const ChannelGeometry g = make_geometry(10.0 * R, R, R, 1.5 * R, uav);
    double integral = 0.0;  // map [-1,1] to [0,R]
    for (int q = 0; q < rule.points.size(); ++q)
      integral += 0.5 * R * rule.weights[q] *
                  poiseuille_profile(g, 0.5 * R * (rule.points[q] + 1.0));
    CHECK(integral == doctest::Approx(uav * R).epsilon(1e-12).scale(std::abs(uav * R) + 1));
  }
}

TEST_CASE("negative curvature of the profile matches the source term") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uni(0.05, 0.45);
  const ChannelGeometry& g = paper_geometry();
  const double d = 0.01;
  for (int i = 0; i < 10; ++i) {
    const double y = uni(rng);
    const double second = (poiseuille_profile(g, y + d) - 2.0 * poiseuille_profile(g, y) +
                           poiseuille_profile(g, y - d)) /
                          (d * d);
    CHECK(-second == doctest::Approx(source_term(g)).epsilon(1e-9));
  }
}

TEST_CASE("source term values") {
  CHECK(source_term(make_geometry(1, 1, 1, 2, 0)) == 0.0);
  CHECK(source_term(paper_geometry()) == doctest::Approx(48.0));
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uni(0.1, 3.0);
  for (int i = 0; i < 10; ++i) {
    const double R = uni(rng), uav = uni(rng);
    const ChannelGeometry g = make_geometry(5 * R, R, R, 2 * R, uav);
    CHECK(source_term(g) * R * R / uav == doctest::Approx(12.0).epsilon(1e-13));
  }
}

TEST_CASE("boundary data per label") {
  const ChannelGeometry& g = paper_geometry();
  CHECK(dirichlet_value(g, {0.0, 0.25}, BoundaryLabel::Inlet) == doctest::Approx(1.5));
  CHECK(dirichlet_value(g, {2.0, 0.0}, BoundaryLabel::Wall) == 0.0);
  CHECK(dirichlet_value(g, {3.0, 0.5}, BoundaryLabel::Wall) == 0.0);
  // outlet at y = -W - R/2 sees the mid-channel value
  CHECK(dirichlet_value(g, {5.6, -1.15}, BoundaryLabel::Outlet) == doctest::Approx(1.5));
  CHECK_THROWS_AS(dirichlet_value(g, {2.0, 0.2}, BoundaryLabel::Wall), std::invalid_argument);
  CHECK_THROWS_AS(dirichlet_value(g, {0.0, 0.25}, BoundaryLabel::Outlet),
                  std::invalid_argument);
}

TEST_CASE("closed-form solution and its gradient") {
  const ChannelGeometry& g = paper_geometry();
  const InterfaceConfig iface = make_interface(g, 4.6);
  const auto mid = zero_d_solution(g, iface, {1.0, 0.25});
  CHECK(mid.value == doctest::Approx(1.5));
  CHECK(mid.gradient.x() == 0.0);
  CHECK(mid.gradient.y() == doctest::Approx(0.0));
  const auto wall = zero_d_solution(g, iface, {1.0, 0.0});
  CHECK(wall.gradient.y() == doctest::Approx(6.0 * g.u_average / g.width));

  // -u'' = f pointwise (second difference is exact for a parabola)
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> uni(0.05, 0.45);
  const double d = 0.02;
  for (int i = 0; i < 10; ++i) {
    const double y = uni(rng);
    const double second =
        (zero_d_solution(g, iface, {1.0, y + d}).value -
         2.0 * zero_d_solution(g, iface, {1.0, y}).value +
         zero_d_solution(g, iface, {1.0, y - d}).value) /
        (d * d);
    CHECK(-second == doctest::Approx(source_term(g)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(zero_d_solution(g, iface, {4.7, 0.25}), std::invalid_argument);
  CHECK_THROWS_AS(zero_d_solution(g, iface, {1.0, 0.6}), std::invalid_argument);
}

TEST_CASE("interface blend: plateau, ramp, and support") {
  const ChannelGeometry& g = paper_geometry();
  const InterfaceConfig iface = make_interface(g, 4.0);
  CHECK(psi_gamma_continuous(g, iface, {4.0, 0.25}) == 1.0);
  CHECK(psi_gamma_continuous(g, iface, {4.0, 0.0}) == 1.0);
  CHECK(psi_gamma_continuous(g, iface, {4.5, 0.25}) == doctest::Approx(0.0));
  CHECK(psi_gamma_continuous(g, iface, {4.25, 0.1}) == doctest::Approx(0.5));
  CHECK(psi_gamma_continuous(g, iface, {1.0, 0.25}) == 1.0);
  CHECK(psi_gamma_continuous(g, iface, {4.1, 0.6}) == 0.0);   // outside the strip
  CHECK(psi_gamma_continuous(g, iface, {5.3, -0.5}) == 0.0);  // inside the bend
}

TEST_CASE("interface blend is continuous across the ramp edges") {
  const ChannelGeometry& g = paper_geometry();
  const InterfaceConfig iface = make_interface(g, 4.0);  // x_gamma + R <= L holds
  const double eps = 1e-9;
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> ys(0.0, 0.5);
  for (int i = 0; i < 50; ++i) {
    const double y = ys(rng);
    const double left = psi_gamma_continuous(g, iface, {4.0 - eps, y});
    const double right = psi_gamma_continuous(g, iface, {4.0 + eps, y});
    CHECK(std::abs(left - right) < 1e-8);
    const double inner = psi_gamma_continuous(g, iface, {4.5 - eps, y});
    const double outer = psi_gamma_continuous(g, iface, {4.5 + eps, y});
    CHECK(std::abs(inner - outer) < 1e-8);
  }
}

TEST_CASE("reduced-domain outline carries the interface label") {
  const ChannelGeometry& g = paper_geometry();
  const InterfaceConfig iface = make_interface(g, 4.6);
  const LabeledPolygon poly = reduced_domain_polygon(g, iface);
  REQUIRE(poly.vertices.size() == 9);
  CHECK(poly.vertices[0].x() == 4.6);
  CHECK(poly.vertices[8].x() == 4.6);
  CHECK(poly.labels[8] == BoundaryLabel::Interface);
  int interface_count = 0;
  for (auto l : poly.labels) interface_count += l == BoundaryLabel::Interface;
  CHECK(interface_count == 1);
}
