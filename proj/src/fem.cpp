#include "serpentine/fem.hpp"

#include "serpentine/quadrature.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cmath>
#include <stdexcept>

namespace serpentine {

namespace {

int local_dof_count(int k) { return (k + 1) * (k + 2) / 2; }

// Barycentric multi-indices of the local nodes, in the dof order described in
// the header: vertices, edge nodes (edge e opposite vertex e, ordered along
// the edge from vertex (e+1)%3 to (e+2)%3), then the interior node (k = 3).
const std::vector<std::array<int, 3>>& local_multi_indices(int k) {
  static const std::vector<std::array<int, 3>> tables[3] = {[] {
    std::vector<std::array<int, 3>> mi;
    mi.push_back({1, 0, 0});
    mi.push_back({0, 1, 0});
    mi.push_back({0, 0, 1});
    return mi;
  }(), [] {
    std::vector<std::array<int, 3>> mi;
    mi.push_back({2, 0, 0});
    mi.push_back({0, 2, 0});
    mi.push_back({0, 0, 2});
    mi.push_back({0, 1, 1});
    mi.push_back({1, 0, 1});
    mi.push_back({1, 1, 0});
    return mi;
  }(), [] {
    std::vector<std::array<int, 3>> mi;
    mi.push_back({3, 0, 0});
    mi.push_back({0, 3, 0});
    mi.push_back({0, 0, 3});
    for (int e = 0; e < 3; ++e) {
      const int va = (e + 1) % 3, vb = (e + 2) % 3;
      for (int j = 1; j < 3; ++j) {
        std::array<int, 3> m{0, 0, 0};
        m[va] = 3 - j;
        m[vb] = j;
        mi.push_back(m);
      }
    }
    mi.push_back({1, 1, 1});
    return mi;
  }()};
  return tables[k - 1];
}

// Silvester polynomial l_m(k t) = prod_{r<m} (k t - r)/(m - r).
double silvester(int m, int k, double t) {
  double v = 1.0;
  for (int r = 0; r < m; ++r) v *= (k * t - r) / (m - r);
  return v;
}

double silvester_deriv(int m, int k, double t) {
  double sum = 0.0;
  for (int s = 0; s < m; ++s) {
    double prod = static_cast<double>(k) / (m - s);
    for (int r = 0; r < m; ++r) {
      if (r == s) continue;
      prod *= (k * t - r) / (m - r);
    }
    sum += prod;
  }
  return sum;
}

// Allocation-free variants for point evaluation (out sized to nloc <= 10).
void shape_values_fixed(int k, const Eigen::Vector3d& bary, double* out) {
  const auto& mi = local_multi_indices(k);
  for (std::size_t i = 0; i < mi.size(); ++i)
    out[i] = silvester(mi[i][0], k, bary[0]) * silvester(mi[i][1], k, bary[1]) *
             silvester(mi[i][2], k, bary[2]);
}

void shape_bary_gradients_fixed(int k, const Eigen::Vector3d& bary, double (*out)[3]) {
  const auto& mi = local_multi_indices(k);
  for (std::size_t i = 0; i < mi.size(); ++i) {
    const double s0 = silvester(mi[i][0], k, bary[0]);
    const double s1 = silvester(mi[i][1], k, bary[1]);
    const double s2 = silvester(mi[i][2], k, bary[2]);
    out[i][0] = silvester_deriv(mi[i][0], k, bary[0]) * s1 * s2;
    out[i][1] = s0 * silvester_deriv(mi[i][1], k, bary[1]) * s2;
    out[i][2] = s0 * s1 * silvester_deriv(mi[i][2], k, bary[2]);
  }
}

}  // namespace

void shape_values(int degree, const Eigen::Vector3d& bary, Eigen::VectorXd& values) {
  const auto mi = local_multi_indices(degree);
  values.resize(static_cast<Eigen::Index>(mi.size()));
  for (std::size_t i = 0; i < mi.size(); ++i) {
    values[static_cast<Eigen::Index>(i)] = silvester(mi[i][0], degree, bary[0]) *
                                           silvester(mi[i][1], degree, bary[1]) *
                                           silvester(mi[i][2], degree, bary[2]);
  }
}

void shape_bary_gradients(int degree, const Eigen::Vector3d& bary, Eigen::MatrixX3d& grads) {
  const auto mi = local_multi_indices(degree);
  grads.resize(static_cast<Eigen::Index>(mi.size()), 3);
  for (std::size_t i = 0; i < mi.size(); ++i) {
    const double s0 = silvester(mi[i][0], degree, bary[0]);
    const double s1 = silvester(mi[i][1], degree, bary[1]);
    const double s2 = silvester(mi[i][2], degree, bary[2]);
    grads(static_cast<Eigen::Index>(i), 0) = silvester_deriv(mi[i][0], degree, bary[0]) * s1 * s2;
    grads(static_cast<Eigen::Index>(i), 1) = s0 * silvester_deriv(mi[i][1], degree, bary[1]) * s2;
    grads(static_cast<Eigen::Index>(i), 2) = s0 * s1 * silvester_deriv(mi[i][2], degree, bary[2]);
  }
}

Eigen::Matrix<double, 3, 2> LagrangeSpace::p1_gradients(int element) const {
  const auto& tri = mesh->triangles[element];
  const Vec2& p0 = mesh->vertices[tri[0]];
  const Vec2& p1 = mesh->vertices[tri[1]];
  const Vec2& p2 = mesh->vertices[tri[2]];
  const double inv2a = 1.0 / (2.0 * mesh->area_tri[element]);
  Eigen::Matrix<double, 3, 2> g;
  g.row(0) << (p1.y() - p2.y()) * inv2a, (p2.x() - p1.x()) * inv2a;
  g.row(1) << (p2.y() - p0.y()) * inv2a, (p0.x() - p2.x()) * inv2a;
  g.row(2) << (p0.y() - p1.y()) * inv2a, (p1.x() - p0.x()) * inv2a;
  return g;
}

std::shared_ptr<const LagrangeSpace> build_space(std::shared_ptr<const TriMesh> mesh,
                                                 int degree) {
  if (degree < 1 || degree > 3)
    throw std::invalid_argument("build_space: degree must be 1, 2 or 3");
  auto space = std::make_shared<LagrangeSpace>();
  space->mesh = mesh;
  space->degree = degree;
  const int k = degree;
  const int nv = mesh->n_vertices();
  const int ne = mesh->n_edges();
  const int per_edge = k - 1;
  const int per_cell = (k - 1) * (k - 2) / 2;
  space->n_dofs = nv + ne * per_edge + mesh->n_triangles() * per_cell;
  space->dofs_per_element = local_dof_count(k);
  space->element_dofs.assign(mesh->n_triangles(), {});
  space->dof_points.resize(space->n_dofs);
  space->dof_boundary_label.assign(space->n_dofs, -1);

  for (int v = 0; v < nv; ++v) space->dof_points[v] = mesh->vertices[v];

  for (int t = 0; t < mesh->n_triangles(); ++t) {
    auto& dofs = space->element_dofs[t];
    const auto& tri = mesh->triangles[t];
    int slot = 0;
    for (int v = 0; v < 3; ++v) dofs[slot++] = tri[v];
    for (int e = 0; e < 3; ++e) {
      const int va = tri[(e + 1) % 3], vb = tri[(e + 2) % 3];
      const int ge = mesh->tri_edges[t][e];
      const int lo = mesh->edges[ge][0];
      for (int j = 1; j < k; ++j) {
        // local node at va + (j/k)(vb - va); global slot counted from `lo`
        const int s = (va == lo) ? j - 1 : k - j - 1;
        const int dof = nv + ge * per_edge + s;
        dofs[slot++] = dof;
        space->dof_points[dof] =
            mesh->vertices[va] + (static_cast<double>(j) / k) * (mesh->vertices[vb] - mesh->vertices[va]);
      }
    }
    if (per_cell > 0) {
      const int dof = nv + ne * per_edge + t;
      dofs[slot++] = dof;
      space->dof_points[dof] = mesh->centroid(t);
    }
  }

  // Boundary classification: a dof on a labeled edge gets that label; corner
  // vertices shared by differently labeled edges keep the smallest label.
  for (int e = 0; e < ne; ++e) {
    const int label = mesh->edge_label[e];
    if (label < 0) continue;
    auto mark = [&](int dof) {
      if (space->dof_boundary_label[dof] < 0 || label < space->dof_boundary_label[dof])
        space->dof_boundary_label[dof] = label;
    };
    mark(mesh->edges[e][0]);
    mark(mesh->edges[e][1]);
    for (int s = 0; s < per_edge; ++s) mark(nv + e * per_edge + s);
  }
  return space;
}

ScalarField solve_poisson(std::shared_ptr<const LagrangeSpace> space, double f,
                          const std::map<BoundaryLabel, BoundaryValue>& g, int direct_limit) {
  const auto& mesh = *space->mesh;
  const int k = space->degree;
  const int nloc = space->dofs_per_element;
  const auto& rule = triangle_rule(2 * k + 2);
  const int nq = static_cast<int>(rule.weights.size());

  // Shape tables at quadrature points.
  std::vector<Eigen::VectorXd> vals(nq);
  std::vector<Eigen::MatrixX3d> bgrads(nq);
  for (int q = 0; q < nq; ++q) {
    shape_values(k, rule.points.col(q), vals[q]);
    shape_bary_gradients(k, rule.points.col(q), bgrads[q]);
  }

  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(space->n_dofs);
  std::vector<char> is_dirichlet(space->n_dofs, 0);
  for (int d = 0; d < space->n_dofs; ++d) {
    const int label = space->dof_boundary_label[d];
    if (label < 0) continue;
    auto it = g.find(static_cast<BoundaryLabel>(label));
    if (it == g.end())
      throw std::invalid_argument("solve_poisson: no boundary value for label " +
                                  label_name(static_cast<BoundaryLabel>(label)));
    is_dirichlet[d] = 1;
    coeffs[d] = it->second(space->dof_points[d]);
  }

  std::vector<int> reduced_index(space->n_dofs, -1);
  int n_free = 0;
  for (int d = 0; d < space->n_dofs; ++d)
    if (!is_dirichlet[d]) reduced_index[d] = n_free++;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.n_triangles()) * nloc * nloc / 2);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_free);

  Eigen::MatrixXd a_loc(nloc, nloc);
  Eigen::VectorXd b_loc(nloc);
  Eigen::MatrixXd grad(nloc, 2);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto g3 = space->p1_gradients(t);
    const double area = mesh.area_tri[t];
    a_loc.setZero();
    b_loc.setZero();
    for (int q = 0; q < nq; ++q) {
      grad.noalias() = bgrads[q] * g3;
      const double w = rule.weights[q] * area;
      a_loc.noalias() += w * grad * grad.transpose();
      b_loc.noalias() += (w * f) * vals[q];
    }
    const auto& dofs = space->element_dofs[t];
    for (int i = 0; i < nloc; ++i) {
      const int gi = dofs[i];
      const int ri = reduced_index[gi];
      if (ri < 0) continue;
      rhs[ri] += b_loc[i];
      for (int j = 0; j < nloc; ++j) {
        const int gj = dofs[j];
        const int rj = reduced_index[gj];
        if (rj >= 0)
          triplets.emplace_back(ri, rj, a_loc(i, j));
        else
          rhs[ri] -= a_loc(i, j) * coeffs[gj];
      }
    }
  }

  Eigen::SparseMatrix<double> A(n_free, n_free);
  A.setFromTriplets(triplets.begin(), triplets.end());
  triplets.clear();
  triplets.shrink_to_fit();

  Eigen::VectorXd u_free;
  if (n_free == 0) {
    u_free.resize(0);
  } else if (n_free <= direct_limit) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("solve_poisson: sparse factorization failed");
    u_free = solver.solve(rhs);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg(A);
    cg.setTolerance(1e-12);
    cg.setMaxIterations(200000);
    u_free = cg.solve(rhs);
    const double scale = std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
    // one step of iterative refinement if the residual floor was hit
    if ((A * u_free - rhs).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      const Eigen::VectorXd r = rhs - A * u_free;
      cg.setTolerance(1e-6);
      u_free += cg.solve(r).eval();
    }
  }

  if (n_free > 0) {
    const double resid = (A * u_free - rhs).cwiseAbs().maxCoeff();
    const double scale = std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
    if (resid > 1e-8 * scale)
      throw std::runtime_error("solve_poisson: residual check failed");
  }

  for (int d = 0; d < space->n_dofs; ++d)
    if (reduced_index[d] >= 0) coeffs[d] = u_free[reduced_index[d]];

  return ScalarField{std::move(space), std::move(coeffs)};
}

double value_at(const ScalarField& field, int element, const Eigen::Vector3d& bary) {
  double vals[10];
  shape_values_fixed(field.space->degree, bary, vals);
  double v = 0.0;
  const auto& dofs = field.space->element_dofs[element];
  for (int i = 0; i < field.space->dofs_per_element; ++i) v += field.coeffs[dofs[i]] * vals[i];
  return v;
}

Eigen::Vector2d gradient_at(const ScalarField& field, int element, const Eigen::Vector3d& bary) {
  double bg[10][3];
  shape_bary_gradients_fixed(field.space->degree, bary, bg);
  const auto g3 = field.space->p1_gradients(element);
  const auto& dofs = field.space->element_dofs[element];
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (int i = 0; i < field.space->dofs_per_element; ++i) {
    const double c = field.coeffs[dofs[i]];
    acc[0] += c * bg[i][0];
    acc[1] += c * bg[i][1];
    acc[2] += c * bg[i][2];
  }
  return (acc.transpose() * g3).transpose();
}

CoupledSolution solve_coupled(const ChannelGeometry& geom, const InterfaceConfig& iface,
                              std::shared_ptr<const TriMesh> mesh, int degree) {
  auto space = build_space(std::move(mesh), degree);
  std::map<BoundaryLabel, BoundaryValue> g;
  g[BoundaryLabel::Wall] = [](const Vec2&) { return 0.0; };
  g[BoundaryLabel::Outlet] = [&geom](const Vec2& p) {
    return poiseuille_profile(geom, p.y() + geom.bend_straight + geom.width);
  };
  g[BoundaryLabel::Interface] = [&geom](const Vec2& p) {
    return poiseuille_profile(geom, p.y());
  };
  auto u = solve_poisson(std::move(space), source_term(geom), g);
  return CoupledSolution{geom, iface, std::move(u)};
}

ScalarField solve_reference(const ChannelGeometry& geom, std::shared_ptr<const TriMesh> mesh,
                            int degree) {
  auto space = build_space(std::move(mesh), degree);
  std::map<BoundaryLabel, BoundaryValue> g;
  g[BoundaryLabel::Wall] = [](const Vec2&) { return 0.0; };
  g[BoundaryLabel::Inlet] = [&geom](const Vec2& p) { return poiseuille_profile(geom, p.y()); };
  g[BoundaryLabel::Outlet] = [&geom](const Vec2& p) {
    return poiseuille_profile(geom, p.y() + geom.bend_straight + geom.width);
  };
  return solve_poisson(std::move(space), source_term(geom), g);
}

double energy_norm_error(const CoupledSolution& coupled, const ScalarField& reference,
                         int quad_degree) {
  const TriMesh& ref_mesh = *reference.space->mesh;
  const TriMesh& mesh = *coupled.u_tilde.space->mesh;
  const PointLocator locator(mesh);
  const auto& rule = triangle_rule(quad_degree);
  const int nq = static_cast<int>(rule.weights.size());
  const double xg = coupled.iface.x_gamma;
  const double R = coupled.geom.width;
  const int k_ref = reference.space->degree;
  const int nloc = reference.space->dofs_per_element;

  // reference-side shape gradients, cached per quadrature point
  std::vector<Eigen::MatrixX3d> bg(nq);
  for (int q = 0; q < nq; ++q) shape_bary_gradients(k_ref, rule.points.col(q), bg[q]);

  double sum = 0.0;
  long misses = 0, total = 0;
  for (int t = 0; t < ref_mesh.n_triangles(); ++t) {
    const auto& tri = ref_mesh.triangles[t];
    const Vec2& p0 = ref_mesh.vertices[tri[0]];
    const Vec2& p1 = ref_mesh.vertices[tri[1]];
    const Vec2& p2 = ref_mesh.vertices[tri[2]];
    const double area = ref_mesh.area_tri[t];
    const auto g3 = reference.space->p1_gradients(t);
    const auto& dofs = reference.space->element_dofs[t];
    for (int q = 0; q < nq; ++q) {
      const Eigen::Vector3d b = rule.points.col(q);
      const Vec2 x = b[0] * p0 + b[1] * p1 + b[2] * p2;
      Eigen::Vector3d acc = Eigen::Vector3d::Zero();
      for (int i = 0; i < nloc; ++i) acc += reference.coeffs[dofs[i]] * bg[q].row(i).transpose();
      const Eigen::Vector2d grad_ref = (acc.transpose() * g3).transpose();
      Eigen::Vector2d grad_c;
      ++total;
      if (x.x() < xg && x.y() > 0.0 && x.y() < R) {
        grad_c << 0.0, poiseuille_slope(coupled.geom, x.y());
      } else {
        const auto loc = locator.locate(x, 1e-9);
        if (!loc.found()) {
          ++misses;
          continue;
        }
        grad_c = gradient_at(coupled.u_tilde, loc.triangle, loc.barycentric);
      }
      sum += rule.weights[q] * area * (grad_ref - grad_c).squaredNorm();
    }
  }
  if (misses * 10000 > total)
    throw std::runtime_error("energy_norm_error: too many point-location failures");
  return std::sqrt(sum);
}

}  // namespace serpentine
