#pragma once

#include "serpentine/adapt.hpp"
#include "serpentine/geometry.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace serpentine {

enum class RunKind { Reference, SweepInterface, SweepMesh, Adaptive, Single };

// Flat "key = value" configuration with [section] headers.
//
//   [geometry]   L, R, W, L_out, u_av
//   [run]        kind, out_dir, degree, reference (path prefix, optional)
//   [reference]  h, tol (0 = quasi-uniform only)
//   [sweep_interface]  h, x_gamma = comma list
//   [sweep_mesh]       x_gamma, h = comma list
//   [adaptive]   tol, tol_gamma, dx, delta, Re, coarse_h, max_iters
//   [single]     x_gamma, h
struct ExperimentConfig {
  double L = 5.1, R = 0.5, W = 0.9, L_out = 0.8, u_av = 1.0;
  RunKind kind = RunKind::Single;
  std::string out_dir = "out";
  int degree = 2;
  std::string reference_path;  // prefix of a <prefix>.mesh / <prefix>.field pair

  double reference_h = 0.005;
  double reference_tol = 0.0;

  double sweep_h = 0.04;
  std::vector<double> sweep_x_gamma;

  double sweep_x_gamma_fixed = 4.6;
  std::vector<double> sweep_h_list;

  AdaptiveConfig adaptive;

  double single_x_gamma = 4.6;
  double single_h = 0.08;

  ChannelGeometry geometry() const { return make_geometry(L, R, W, L_out, u_av); }
};

// Throws std::runtime_error with "file:line:column: message" on bad input.
ExperimentConfig parse_config(std::istream& in, const std::string& filename);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace serpentine
