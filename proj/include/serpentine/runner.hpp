#pragma once

#include "serpentine/adapt.hpp"
#include "serpentine/config.hpp"
#include "serpentine/estimator.hpp"
#include "serpentine/fem.hpp"
#include "serpentine/flux.hpp"

#include <memory>
#include <optional>
#include <string>

namespace serpentine {

// One coupled solve with its estimator data.
struct SolvedCase {
  std::shared_ptr<const TriMesh> mesh;
  CoupledSolution solution;
  NodeClassification cls;
  FluxAssembly flux;
  EstimatorReport report;
};

SolvedCase run_case(const ChannelGeometry& geom, double x_gamma, double target_h, int degree);

// Per-cell values of the global estimator density (for VTK output).
Eigen::VectorXd eta_per_element(const CoupledFlux& flux, const CoupledSolution& coupled);

// Loads a reference written by the reference run kind
// (<prefix>.mesh + <prefix>.field).
ScalarField load_reference(const std::string& prefix);

// Executes a parsed configuration; returns the process exit status
// (0 = success, 2 = estimator reliability violated against a reference).
int run_experiment(const ExperimentConfig& config, const std::string& out_dir_override,
                   bool quiet);

}  // namespace serpentine
