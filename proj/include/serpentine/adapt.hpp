#pragma once

#include "serpentine/estimator.hpp"
#include "serpentine/fem.hpp"
#include "serpentine/flux.hpp"
#include "serpentine/mesh.hpp"

#include <Eigen/Core>

#include <memory>
#include <utility>
#include <vector>

namespace serpentine {

struct AdaptiveConfig {
  double tol = 1e-2;
  double tol_gamma = 0;  // 0 selects 0.1 * tol
  double dx = 0.1;       // interface step
  double delta = 1.0;    // size-field exponent
  double re = 4.0;       // error-reduction factor per adaptation
  double coarse_h = 0;   // 0 selects R / 3
  int max_iters = 30;
  int degree = 2;
  double h_floor = 1e-5;
  std::size_t max_elements = 2'000'000;

  // Applies the documented defaults and validates ranges.
  AdaptiveConfig filled(const ChannelGeometry& geom) const;
};

// Per-element optimal size field minimizing the dof count at fixed predicted
// error; evaluable at any point via location in the snapshot mesh.
struct SizeField {
  std::shared_ptr<const TriMesh> mesh;
  std::shared_ptr<const PointLocator> locator;
  Eigen::VectorXd h_opt;
  double target_error = 0;

  double operator()(const Vec2& x) const;
};

SizeField hopt_size_field(std::shared_ptr<const TriMesh> mesh,
                          const Eigen::VectorXd& eta_d_cells, double delta, double re,
                          double h_floor = 1e-5);

struct InterfaceSearchResult {
  double x_gamma = 0;
  bool converged = false;
  std::vector<std::pair<double, double>> trace;  // (x_gamma, eta_gamma) per step
};

// Interface placement loop: start at L - R and walk towards the inlet in dx
// steps until the interface indicator drops below tol_gamma, re-meshing
// coarsely at every step.
InterfaceSearchResult choose_interface(const ChannelGeometry& geom,
                                       const AdaptiveConfig& config);

struct AdaptiveResult {
  bool converged = false;
  std::vector<EstimatorReport> history;     // one entry per mesh
  std::vector<CoupledSolution> iterates;    // matching solutions
  std::shared_ptr<const TriMesh> mesh;      // final mesh
  NodeClassification cls;                   // final classification
  FluxAssembly flux;                        // final flux fields
};

// Mesh adaptation loop at a fixed interface: solve, estimate, build the
// optimal size field from the per-cell indicators, re-refine the coarse mesh.
AdaptiveResult adaptive_solve(const ChannelGeometry& geom, const InterfaceConfig& iface,
                              const AdaptiveConfig& config);

struct ReferenceResult {
  bool converged = false;
  std::shared_ptr<const TriMesh> mesh;
  ScalarField field;
  std::vector<EstimatorReport> history;
};

// Adaptively refined solution of the original full-domain problem, driven by
// the same equilibrated-flux indicators; its final eta certifies the
// reference accuracy.
ReferenceResult adaptive_reference(const ChannelGeometry& geom, const AdaptiveConfig& config);

}  // namespace serpentine
