#pragma once

#include "serpentine/fem.hpp"
#include "serpentine/flux.hpp"

#include <Eigen/Core>

#include <optional>

namespace serpentine {

struct EstimatorReport {
  double eta = 0;
  double eta_gamma = 0;
  double eta_d = 0;
  Eigen::VectorXd eta_d_per_cell;
  std::optional<double> error;
  std::optional<double> effectivity;
  int n_dof = 0;
  double x_gamma = 0;
  double h_max = 0;
  int iteration = 0;
};

// Global estimator ||sigma + grad u|| over the whole domain.  Left of the
// interface the integrand vanishes identically (the analytic flux is exactly
// -grad u'), so only the meshed part is integrated.
double eta_total(const CoupledFlux& flux, const CoupledSolution& coupled);

// Interface indicator: the interface-patch flux against the blended gradient,
// restricted to the patch support.
double eta_gamma(const BrokenRTField& sigma_gamma, const ScalarField& u_tilde,
                 const NodeClassification& cls);

// Per-cell discretization indicators from the unweighted node-patch sum.
Eigen::VectorXd eta_d_per_element(const BrokenRTField& sigma_d, const ScalarField& u_tilde);

std::optional<double> effectivity(std::optional<double> error, double eta);

}  // namespace serpentine
