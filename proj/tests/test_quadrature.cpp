#include "serpentine/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace serpentine;

namespace {

double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// int over the unit triangle of x^i y^j
double exact_triangle_monomial(int i, int j) {
  return factorial(i) * factorial(j) / factorial(i + j + 2);
}

}  // namespace

TEST_CASE("triangle rules integrate monomials exactly up to their degree") {
  for (int degree : {1, 2, 4, 5, 6, 8, 9, 10}) {
    const TriQuadRule& rule = triangle_rule(degree);
    REQUIRE(rule.degree >= degree);
    CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rule.weights.minCoeff() > 0.0);
    for (int i = 0; i <= rule.degree; ++i) {
      for (int j = 0; i + j <= rule.degree; ++j) {
        double acc = 0.0;
        for (int q = 0; q < rule.weights.size(); ++q) {
          const double x = rule.points(1, q);
          const double y = rule.points(2, q);
          acc += rule.weights[q] * std::pow(x, i) * std::pow(y, j);
        }
        // weights sum to 1 over a triangle of area 1/2
        const double exact = 2.0 * exact_triangle_monomial(i, j);
        CHECK(acc == doctest::Approx(exact).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("barycentric points lie inside the triangle") {
  for (int degree : {2, 4, 6, 9}) {
    const TriQuadRule& rule = triangle_rule(degree);
    for (int q = 0; q < rule.weights.size(); ++q) {
      CHECK(rule.points.col(q).minCoeff() >= 0.0);
      CHECK(rule.points.col(q).sum() == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("edge rules are exact to degree 2n-1") {
  for (int n = 1; n <= 6; ++n) {
    const EdgeQuadRule& rule = edge_rule(n);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double acc = 0.0;
      for (int q = 0; q < rule.points.size(); ++q)
        acc += rule.weights[q] * std::pow(rule.points[q], p);
      const double exact = (p % 2 == 1) ? 0.0 : 2.0 / (p + 1);
      CHECK(acc == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
    }
  }
}

TEST_CASE("legendre polynomials are orthogonal and normalized at 1") {
  const EdgeQuadRule& rule = edge_rule(6);
  for (int i = 0; i <= 5; ++i) {
    CHECK(legendre(i, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (int j = 0; j <= 5; ++j) {
      double acc = 0.0;
      for (int q = 0; q < rule.points.size(); ++q)
        acc += rule.weights[q] * legendre(i, rule.points[q]) * legendre(j, rule.points[q]);
      const double exact = (i == j) ? 2.0 / (2 * i + 1) : 0.0;
      CHECK(acc == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
    }
  }
}
