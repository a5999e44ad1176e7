#pragma once

#include "serpentine/geometry.hpp"
#include "serpentine/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace serpentine {

// Continuous Lagrange space of degree k in {1,2,3} on a triangle mesh.
// Dof order: vertex dofs, then (k-1) dofs per mesh edge (ordered from the
// lower-indexed towards the higher-indexed endpoint), then interior dofs.
struct LagrangeSpace {
  std::shared_ptr<const TriMesh> mesh;
  int degree = 0;
  int n_dofs = 0;
  int dofs_per_element = 0;
  std::vector<std::array<int, 10>> element_dofs;   // 10 covers k <= 3
  std::vector<Vec2> dof_points;
  std::vector<int> dof_boundary_label;             // -1 interior, else BoundaryLabel

  // Barycentric gradients of the local P1 basis (rows = local vertex).
  Eigen::Matrix<double, 3, 2> p1_gradients(int element) const;
};

std::shared_ptr<const LagrangeSpace> build_space(std::shared_ptr<const TriMesh> mesh,
                                                 int degree);

// Values / barycentric derivatives of the local degree-k basis at a
// barycentric point; row i = local dof i.
void shape_values(int degree, const Eigen::Vector3d& bary, Eigen::VectorXd& values);
void shape_bary_gradients(int degree, const Eigen::Vector3d& bary, Eigen::MatrixX3d& grads);

struct ScalarField {
  std::shared_ptr<const LagrangeSpace> space;
  Eigen::VectorXd coeffs;
};

using BoundaryValue = std::function<double(const Vec2&)>;

// Galerkin solution of -lap u = f with Dirichlet data per boundary label.
// Dirichlet dofs carry nodal interpolation of g; the reduced system is solved
// by sparse Cholesky up to `direct_limit` unknowns and by Jacobi-PCG above.
ScalarField solve_poisson(std::shared_ptr<const LagrangeSpace> space, double f,
                          const std::map<BoundaryLabel, BoundaryValue>& g,
                          int direct_limit = 300000);

double value_at(const ScalarField& field, int element, const Eigen::Vector3d& bary);
Eigen::Vector2d gradient_at(const ScalarField& field, int element, const Eigen::Vector3d& bary);

// Piecewise object: closed-form profile left of the interface, finite element
// solution on the meshed remainder, glued by the interface trace.
struct CoupledSolution {
  ChannelGeometry geom;
  InterfaceConfig iface;
  ScalarField u_tilde;
};

// Solves the reduced-domain problem with interface trace S(y).
CoupledSolution solve_coupled(const ChannelGeometry& geom, const InterfaceConfig& iface,
                              std::shared_ptr<const TriMesh> mesh, int degree);

// Solves the original problem on a full-domain mesh (reference solutions).
ScalarField solve_reference(const ChannelGeometry& geom, std::shared_ptr<const TriMesh> mesh,
                            int degree);

// Energy-norm distance between the coupled solution and a reference field on
// a finer full-domain mesh; quadrature runs on the reference mesh.
double energy_norm_error(const CoupledSolution& coupled, const ScalarField& reference,
                         int quad_degree = 4);

}  // namespace serpentine
