#pragma once

#include <Eigen/Core>

namespace serpentine {

// Symmetric Gauss rule on the triangle, given in barycentric coordinates.
// Weights sum to 1; multiply by |T| to integrate over a physical element.
struct TriQuadRule {
  Eigen::Matrix3Xd points;  // column q = (l0, l1, l2)
  Eigen::VectorXd weights;
  int degree = 0;  // highest polynomial degree integrated exactly
};

// Smallest available rule exact for polynomials of the requested degree.
// Available degrees: 1, 2, 4, 5, 6, 8 (requests in between round up).
const TriQuadRule& triangle_rule(int degree);

// Gauss-Legendre rule on [-1, 1]; weights sum to 2.  n in [1, 6].
struct EdgeQuadRule {
  Eigen::VectorXd points;
  Eigen::VectorXd weights;
};
const EdgeQuadRule& edge_rule(int n_points);

// Legendre polynomial P_n(t), n in [0, 5].
double legendre(int n, double t);

}  // namespace serpentine
