#include "serpentine/rt_basis.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace serpentine {

EdgeFrame edge_frame(const TriMesh& mesh, int edge) {
  EdgeFrame f;
  f.lo = mesh.vertices[mesh.edges[edge][0]];
  f.hi = mesh.vertices[mesh.edges[edge][1]];
  const Vec2 d = f.hi - f.lo;
  f.length = d.norm();
  f.normal = Vec2(d.y(), -d.x()) / f.length;
  // orient away from the first adjacent triangle
  const int t0 = mesh.edge_tris[edge][0];
  const Vec2 mid = 0.5 * (f.lo + f.hi);
  if (f.normal.dot(mid - mesh.centroid(t0)) < 0.0) f.normal = -f.normal;
  return f;
}

const std::vector<std::array<int, 2>>& scalar_monomials(int k) {
  static const auto tables = [] {
    std::array<std::vector<std::array<int, 2>>, 4> t;
    for (int kk = 0; kk <= 3; ++kk) {
      for (int d = 0; d <= kk; ++d)
        for (int i = d; i >= 0; --i) t[kk].push_back({i, d - i});
    }
    return t;
  }();
  if (k < 0 || k > 3) throw std::invalid_argument("scalar_monomials: k out of range");
  return tables[k];
}

void pressure_values(int k, const Vec2& centroid, double scale, const Vec2& x,
                     Eigen::RowVectorXd& values) {
  const auto& mono = scalar_monomials(k);
  const Vec2 X = (x - centroid) / scale;
  values.resize(static_cast<Eigen::Index>(mono.size()));
  for (std::size_t m = 0; m < mono.size(); ++m)
    values[static_cast<Eigen::Index>(m)] =
        std::pow(X.x(), mono[m][0]) * std::pow(X.y(), mono[m][1]);
}

void RTElementBasis::monomials(const Vec2& x, Eigen::Matrix2Xd& fields,
                               Eigen::RowVectorXd* div) const {
  const auto& mono = scalar_monomials(k_);
  const int np = static_cast<int>(mono.size());
  const Vec2 X = (x - centroid_) / scale_;
  fields.setZero(2, n_dofs_);
  if (div) div->setZero(n_dofs_);
  // powers up to k
  double px[5], py[5];
  px[0] = py[0] = 1.0;
  for (int i = 1; i <= k_ + 1; ++i) {
    px[i] = px[i - 1] * X.x();
    py[i] = py[i - 1] * X.y();
  }
  for (int m = 0; m < np; ++m) {
    const int i = mono[m][0], j = mono[m][1];
    const double q = px[i] * py[j];
    fields(0, m) = q;
    fields(1, np + m) = q;
    if (div) {
      (*div)[m] = (i > 0) ? i * px[i - 1] * py[j] / scale_ : 0.0;
      (*div)[np + m] = (j > 0) ? j * px[i] * py[j - 1] / scale_ : 0.0;
    }
  }
  // X * (homogeneous monomials of degree k)
  for (int t = 0; t <= k_; ++t) {
    const double h = px[k_ - t] * py[t];
    const int col = 2 * np + t;
    fields(0, col) = X.x() * h;
    fields(1, col) = X.y() * h;
    if (div) (*div)[col] = (k_ + 2) * h / scale_;
  }
}

RTElementBasis::RTElementBasis(const TriMesh& mesh, int element, int k) : k_(k) {
  if (k < 1 || k > 3) throw std::invalid_argument("RTElementBasis: k must be 1..3");
  n_scalar_ = (k + 1) * (k + 2) / 2;
  n_dofs_ = (k + 1) * (k + 3);
  const auto& tri = mesh.triangles[element];
  for (int v = 0; v < 3; ++v) corners_[v] = mesh.vertices[tri[v]];
  centroid_ = (corners_[0] + corners_[1] + corners_[2]) / 3.0;
  scale_ = mesh.h_tri[element];

  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n_dofs_, n_dofs_);
  Eigen::Matrix2Xd fields;

  // edge moment rows
  const auto& erule = edge_rule(k + 2);
  for (int e = 0; e < 3; ++e) {
    const EdgeFrame frame = edge_frame(mesh, mesh.tri_edges[element][e]);
    for (int q = 0; q < erule.points.size(); ++q) {
      const double t = erule.points[q];
      const Vec2 x = 0.5 * (frame.lo + frame.hi) + 0.5 * t * (frame.hi - frame.lo);
      monomials(x, fields, nullptr);
      const Eigen::RowVectorXd vn = frame.normal.transpose() * fields;
      for (int j = 0; j <= k; ++j)
        V.row(edge_dof(e, j)) += 0.5 * erule.weights[q] * legendre(j, t) * vn;
    }
  }

  // interior moment rows
  const auto& trule = triangle_rule(2 * k + 2);
  const int n_int = k * (k + 1) / 2;  // scalar monomials of degree <= k-1
  for (int q = 0; q < trule.weights.size(); ++q) {
    const Eigen::Vector3d b = trule.points.col(q);
    const Vec2 x = b[0] * corners_[0] + b[1] * corners_[1] + b[2] * corners_[2];
    monomials(x, fields, nullptr);
    Eigen::RowVectorXd pres;
    pressure_values(k - 1, centroid_, scale_, x, pres);
    for (int m = 0; m < n_int; ++m) {
      V.row(3 * (k + 1) + m) += trule.weights[q] * pres[m] * fields.row(0);
      V.row(3 * (k + 1) + n_int + m) += trule.weights[q] * pres[m] * fields.row(1);
    }
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(V);
  coeff_ = lu.solve(Eigen::MatrixXd::Identity(n_dofs_, n_dofs_));
  if ((V * coeff_ - Eigen::MatrixXd::Identity(n_dofs_, n_dofs_)).cwiseAbs().maxCoeff() > 1e-8)
    throw std::runtime_error("RTElementBasis: degenerate element");
}

void RTElementBasis::eval(const Vec2& x, Eigen::Matrix2Xd& values) const {
  Eigen::Matrix2Xd fields;
  monomials(x, fields, nullptr);
  values.noalias() = fields * coeff_;
}

void RTElementBasis::eval_divergence(const Vec2& x, Eigen::RowVectorXd& div) const {
  Eigen::Matrix2Xd fields;
  Eigen::RowVectorXd mono_div;
  monomials(x, fields, &mono_div);
  div.noalias() = mono_div * coeff_;
}

double RTElementBasis::normal_trace(const Eigen::VectorXd& coeffs, double t,
                                    const EdgeFrame& frame) const {
  const Vec2 x = 0.5 * (frame.lo + frame.hi) + 0.5 * t * (frame.hi - frame.lo);
  Eigen::Matrix2Xd values;
  eval(x, values);
  return frame.normal.dot(values * coeffs);
}

}  // namespace serpentine
