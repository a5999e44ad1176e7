#pragma once

#include "serpentine/mesh.hpp"
#include "serpentine/quadrature.hpp"

#include <Eigen/Core>

#include <array>
#include <vector>

namespace serpentine {

// Orientation frame of a mesh edge: tangent runs from the lower-indexed to
// the higher-indexed vertex, the unit normal points from the lower-indexed
// adjacent triangle into the higher-indexed one (outward on the boundary).
struct EdgeFrame {
  Vec2 lo, hi;
  Vec2 normal;
  double length;
};

EdgeFrame edge_frame(const TriMesh& mesh, int edge);

// Local Raviart-Thomas basis RT_k(T) = [P_k]^2 + x Ptilde_k, dual to
//  - edge dofs: (1/|e|) int_e (v.n_e) P_j ds, j = 0..k, for the element's
//    three edges in tri_edges order, with the global frame above;
//  - interior dofs: (1/|T|) int_T v . m dx for m = (q,0),(0,q), q a scaled
//    monomial of degree <= k-1.
// Basis functions are stored as coefficient columns over scaled monomial
// fields; shared edge dofs therefore glue to an H(div)-conforming field.
class RTElementBasis {
 public:
  RTElementBasis(const TriMesh& mesh, int element, int k);

  int order() const { return k_; }
  int n_dofs() const { return n_dofs_; }
  int n_edge_dofs() const { return 3 * (k_ + 1); }

  // dof index of moment j on local edge e (edge opposite local vertex e)
  int edge_dof(int e, int j) const { return e * (k_ + 1) + j; }

  // Values (2 x n_dofs) and divergences (n_dofs) of all basis functions.
  void eval(const Vec2& x, Eigen::Matrix2Xd& values) const;
  void eval_divergence(const Vec2& x, Eigen::RowVectorXd& div) const;

  // Normal trace of a coefficient vector at parameter t in [-1,1] along an
  // edge frame of this element.
  double normal_trace(const Eigen::VectorXd& coeffs, double t, const EdgeFrame& frame) const;

  const Vec2& centroid() const { return centroid_; }
  double scale() const { return scale_; }

 private:
  int k_, n_dofs_, n_scalar_;
  Vec2 centroid_;
  double scale_;
  Eigen::MatrixXd coeff_;  // monomial coefficients, column = basis function
  std::array<Vec2, 3> corners_;

  void monomials(const Vec2& x, Eigen::Matrix2Xd& fields, Eigen::RowVectorXd* div) const;
};

// Scalar monomial exponents (i, j), degree <= k, in the fixed order used for
// both RT interior moments and broken pressure spaces.
const std::vector<std::array<int, 2>>& scalar_monomials(int k);

// Values of the scaled pressure monomials q((x - c)/h) at a point.
void pressure_values(int k, const Vec2& centroid, double scale, const Vec2& x,
                     Eigen::RowVectorXd& values);

}  // namespace serpentine
