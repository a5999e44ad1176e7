#include "serpentine/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace serpentine {

namespace {

struct Orbit {
  // multiplicity 1: centroid; 3: (1-2a, a, a) permutations; 6: (1-a-b, a, b) permutations
  int multiplicity;
  double a, b, w;
};

TriQuadRule build_rule(int degree, const std::vector<Orbit>& orbits) {
  int n = 0;
  for (const auto& o : orbits) n += o.multiplicity;
  TriQuadRule rule;
  rule.degree = degree;
  rule.points.resize(3, n);
  rule.weights.resize(n);
  int q = 0;
  auto push = [&](double l0, double l1, double l2, double w) {
    rule.points.col(q) << l0, l1, l2;
    rule.weights[q] = w;
    ++q;
  };
  for (const auto& o : orbits) {
    if (o.multiplicity == 1) {
      push(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, o.w);
    } else if (o.multiplicity == 3) {
      const double c = 1.0 - 2.0 * o.a;
      push(c, o.a, o.a, o.w);
      push(o.a, c, o.a, o.w);
      push(o.a, o.a, c, o.w);
    } else {
      const double c = 1.0 - o.a - o.b;
      push(c, o.a, o.b, o.w);
      push(c, o.b, o.a, o.w);
      push(o.a, c, o.b, o.w);
      push(o.b, c, o.a, o.w);
      push(o.a, o.b, c, o.w);
      push(o.b, o.a, c, o.w);
    }
  }
  return rule;
}

// Gauss nodes/weights for weight (1-x)^alpha on [0,1], via Golub-Welsch on the
// Jacobi (alpha, 0) recurrence.
void gauss_jacobi01(int n, double alpha, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double den = (2 * i + alpha) * (2 * i + alpha + 2);
    J(i, i) = den == 0.0 ? 0.0 : -alpha * alpha / den;
    if (i > 0) {
      const double k = i;
      const double num = 4 * k * (k + alpha) * k * (k + alpha);
      const double den2 = (2 * k + alpha) * (2 * k + alpha) * (2 * k + alpha + 1) *
                          (2 * k + alpha - 1);
      J(i, i - 1) = J(i - 1, i) = std::sqrt(num / den2);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::pow(2.0, alpha + 1.0) / (alpha + 1.0);  // int_{-1}^{1} (1-t)^a dt
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = 0.5 * (1.0 + es.eigenvalues()[i]);
    const double v = es.eigenvectors()(0, i);
    w[i] = mu0 * v * v / std::pow(2.0, alpha + 1.0);  // mapped to [0,1]
  }
}

// Conical product rule on the triangle, exact for total degree 2n-1.
TriQuadRule conical_rule(int n) {
  Eigen::VectorXd xu, wu, yv, wv;
  gauss_jacobi01(n, 0.0, xu, wu);  // plain Gauss-Legendre on [0,1]
  gauss_jacobi01(n, 1.0, yv, wv);  // weight (1-y) on [0,1]
  TriQuadRule rule;
  rule.degree = 2 * n - 1;
  rule.points.resize(3, n * n);
  rule.weights.resize(n * n);
  int q = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double y = yv[i];
      const double x = (1.0 - y) * xu[j];
      rule.points.col(q) << 1.0 - x - y, x, y;
      // wu sums to 1, wv to 1/2 on the unit triangle; normalize so weights sum to 1
      rule.weights[q] = 2.0 * wv[i] * wu[j];
      ++q;
    }
  }
  return rule;
}

// Dunavant rules (all-positive weights) up to degree 6, conical products above.
const std::map<int, TriQuadRule>& rule_table() {
  static const std::map<int, TriQuadRule> table = [] {
    std::map<int, TriQuadRule> t;
    t[1] = build_rule(1, {{1, 0, 0, 1.0}});
    t[2] = build_rule(2, {{3, 1.0 / 6.0, 0, 1.0 / 3.0}});
    t[4] = build_rule(4, {{3, 0.445948490915965, 0, 0.223381589678011},
                          {3, 0.091576213509771, 0, 0.109951743655322}});
    t[5] = build_rule(5, {{1, 0, 0, 0.225},
                          {3, 0.470142064105115, 0, 0.132394152788506},
                          {3, 0.101286507323456, 0, 0.125939180544827}});
    t[6] = build_rule(6, {{3, 0.249286745170910, 0, 0.116786275726379},
                          {3, 0.063089014491502, 0, 0.050844906370207},
                          {6, 0.310352451033785, 0.053145049844816, 0.082851075618374}});
    t[9] = conical_rule(5);
    t[11] = conical_rule(6);
    return t;
  }();
  return table;
}

}  // namespace

const TriQuadRule& triangle_rule(int degree) {
  const auto& table = rule_table();
  auto it = table.lower_bound(degree);
  if (it == table.end()) throw std::invalid_argument("triangle_rule: degree too high");
  return it->second;
}

const EdgeQuadRule& edge_rule(int n_points) {
  static const std::vector<EdgeQuadRule> rules = [] {
    std::vector<EdgeQuadRule> r(7);
    auto set = [&](int n, std::initializer_list<double> pts, std::initializer_list<double> ws) {
      r[n].points = Eigen::Map<const Eigen::VectorXd>(pts.begin(), n);
      r[n].weights = Eigen::Map<const Eigen::VectorXd>(ws.begin(), n);
    };
    set(1, {0.0}, {2.0});
    set(2, {-0.5773502691896257, 0.5773502691896257}, {1.0, 1.0});
    set(3, {-0.7745966692414834, 0.0, 0.7745966692414834},
        {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0});
    set(4,
        {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526},
        {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538});
    set(5,
        {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
         0.9061798459386640},
        {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
         0.2369268850561891});
    set(6,
        {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969, 0.2386191860831969,
         0.6612093864662645, 0.9324695142031521},
        {0.1713244923791704, 0.3607615730481386, 0.4679139345726910, 0.4679139345726910,
         0.3607615730481386, 0.1713244923791704});
    return r;
  }();
  if (n_points < 1 || n_points > 6) throw std::invalid_argument("edge_rule: n out of range");
  return rules[n_points];
}

double legendre(int n, double t) {
  switch (n) {
    case 0: return 1.0;
    case 1: return t;
    case 2: return 0.5 * (3.0 * t * t - 1.0);
    case 3: return 0.5 * t * (5.0 * t * t - 3.0);
    case 4: return 0.125 * ((35.0 * t * t - 30.0) * t * t + 3.0);
    case 5: return 0.125 * t * ((63.0 * t * t - 70.0) * t * t + 15.0);
    default: throw std::invalid_argument("legendre: order out of range");
  }
}

}  // namespace serpentine
