#include "serpentine/estimator.hpp"

#include "serpentine/quadrature.hpp"
#include "serpentine/rt_basis.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace serpentine {

namespace {

// sum over the given elements of int_T |sigma + psi * grad(u)|^2 with a P1
// weight given by nodal values (all ones reproduces |sigma + grad u|^2)
double flux_misfit_norm2(const BrokenRTField& sigma, const ScalarField& u,
                         const std::vector<int>& elements,
                         const Eigen::VectorXd* vertex_weights,
                         Eigen::VectorXd* per_element = nullptr) {
  const LagrangeSpace& space = *u.space;
  const TriMesh& mesh = *space.mesh;
  const int k = space.degree;
  const auto& rule = triangle_rule(2 * k + 2);
  const int nq = static_cast<int>(rule.weights.size());

  std::vector<Eigen::MatrixX3d> bg(nq);
  for (int q = 0; q < nq; ++q) shape_bary_gradients(k, rule.points.col(q), bg[q]);

  double total = 0.0;
  Eigen::Matrix2Xd phi;
  for (int el : elements) {
    const RTElementBasis basis(mesh, el, k);
    const auto& tri = mesh.triangles[el];
    const Vec2& p0 = mesh.vertices[tri[0]];
    const Vec2& p1 = mesh.vertices[tri[1]];
    const Vec2& p2 = mesh.vertices[tri[2]];
    const auto g3 = space.p1_gradients(el);
    const auto& dofs = space.element_dofs[el];
    Eigen::Vector3d w_nodal = Eigen::Vector3d::Ones();
    if (vertex_weights)
      w_nodal << (*vertex_weights)[tri[0]], (*vertex_weights)[tri[1]], (*vertex_weights)[tri[2]];
    double cell = 0.0;
    for (int q = 0; q < nq; ++q) {
      const Eigen::Vector3d b = rule.points.col(q);
      const Vec2 x = b[0] * p0 + b[1] * p1 + b[2] * p2;
      basis.eval(x, phi);
      const Eigen::Vector2d sig = phi * sigma.coeffs.col(el);
      Eigen::Vector2d grad_u = Eigen::Vector2d::Zero();
      for (int i = 0; i < space.dofs_per_element; ++i)
        grad_u += u.coeffs[dofs[i]] * (bg[q].row(i) * g3).transpose();
      const double psi = w_nodal.dot(b);
      cell += rule.weights[q] * mesh.area_tri[el] * (sig + psi * grad_u).squaredNorm();
    }
    total += cell;
    if (per_element) (*per_element)[el] = std::sqrt(cell);
  }
  return total;
}

std::vector<int> all_elements(const TriMesh& mesh) {
  std::vector<int> v(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) v[t] = t;
  return v;
}

}  // namespace

double eta_total(const CoupledFlux& flux, const CoupledSolution& coupled) {
  const TriMesh& mesh = *flux.sigma_tilde.mesh;
  if (coupled.u_tilde.space->mesh.get() != &mesh)
    throw std::invalid_argument("eta_total: flux and solution live on different meshes");
  const double sq =
      flux_misfit_norm2(flux.sigma_tilde, coupled.u_tilde, all_elements(mesh), nullptr);
  return std::sqrt(sq);
}

double eta_gamma(const BrokenRTField& sigma_gamma, const ScalarField& u_tilde,
                 const NodeClassification& cls) {
  if (!cls.has_interface) return 0.0;
  const TriMesh& mesh = *sigma_gamma.mesh;
  std::vector<int> support;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    if (cls.weight[tri[0]] > 0.0 || cls.weight[tri[1]] > 0.0 || cls.weight[tri[2]] > 0.0)
      support.push_back(t);
  }
  return std::sqrt(flux_misfit_norm2(sigma_gamma, u_tilde, support, &cls.weight));
}

Eigen::VectorXd eta_d_per_element(const BrokenRTField& sigma_d, const ScalarField& u_tilde) {
  const TriMesh& mesh = *sigma_d.mesh;
  Eigen::VectorXd per_cell = Eigen::VectorXd::Zero(mesh.n_triangles());
  flux_misfit_norm2(sigma_d, u_tilde, all_elements(mesh), nullptr, &per_cell);
  return per_cell;
}

std::optional<double> effectivity(std::optional<double> error, double eta) {
  if (!error || !(*error > 0.0)) return std::nullopt;
  return eta / *error;
}

}  // namespace serpentine
