#pragma once

#include "serpentine/fem.hpp"
#include "serpentine/geometry.hpp"
#include "serpentine/mesh.hpp"

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <vector>

namespace serpentine {

enum class NodeClass { Interior, Boundary, OnGamma };

// Vertex classes and interface-blend weights psi_gamma(a).  Without an
// interface all weights are zero and only Interior/Boundary occur.
struct NodeClassification {
  bool has_interface = false;
  double x_gamma = 0;
  std::vector<NodeClass> node_class;
  Eigen::VectorXd weight;
  int n_gamma = 0;
};

NodeClassification classify_nodes(const LagrangeSpace& space, const ChannelGeometry& geom,
                                  const std::optional<InterfaceConfig>& iface);

enum class PatchKind { InteriorNode, BoundaryNode, GammaNode, Gamma };

inline constexpr int kGammaPatch = -1;

// One local mixed problem: elements around a vertex (or the support of the
// interface blend), the participating edges, and which of them carry flux
// unknowns.  Edges without unknowns are constrained to zero normal flux.
struct PatchProblem {
  PatchKind kind = PatchKind::InteriorNode;
  int node = kGammaPatch;
  std::vector<int> elements;
  std::vector<int> edges;
  std::vector<char> edge_has_dofs;
  bool zero_mean = false;
  Eigen::Matrix3Xd weights;  // nodal values of the weight function, per element
};

// Adjacency cache for building many patches on one space.
class PatchFactory {
 public:
  PatchFactory(const LagrangeSpace& space, const NodeClassification& cls);
  PatchProblem vertex_patch(int v) const;      // Interior/Boundary nodes
  PatchProblem gamma_patch() const;            // interface patch
  PatchProblem gamma_node_patch(int v) const;  // indicator-only patches on Gamma nodes
  const std::vector<std::vector<int>>& vertex_tris() const { return vertex_tris_; }

 private:
  const LagrangeSpace* space_;
  const NodeClassification* cls_;
  std::vector<std::vector<int>> vertex_tris_;

  PatchProblem make(PatchKind kind, int node, std::vector<int> elements) const;
};

// Spec-level entry: id is a non-interface vertex or kGammaPatch.
PatchProblem build_patch(const LagrangeSpace& space, const NodeClassification& cls, int id);

struct PatchSolution {
  PatchKind kind = PatchKind::InteriorNode;
  int node = kGammaPatch;
  std::vector<int> elements;
  Eigen::MatrixXd flux;      // RT dofs x n_patch_elements (global edge frames)
  Eigen::MatrixXd pressure;  // pressure dofs x n_patch_elements
};

// Solves the local saddle-point problem (flux mass matrix + divergence
// constraint) for the patch.  Interior-node patches enforce the zero-mean
// pressure constraint by a scalar multiplier and require compatible data.
PatchSolution solve_patch(const PatchProblem& patch, const ScalarField& u_tilde, double f);

// Broken Raviart-Thomas field as per-element dof blocks in the global edge
// frames; zero blocks outside the assembled supports.
struct BrokenRTField {
  std::shared_ptr<const TriMesh> mesh;
  int k = 0;
  Eigen::MatrixXd coeffs;  // n_rt_dofs x n_triangles

  Vec2 value(int element, const Vec2& x) const;
  double divergence(int element, const Vec2& x) const;
};

BrokenRTField zero_rt_field(std::shared_ptr<const TriMesh> mesh, int k);

// Flux on the whole domain: analytic -grad(u') left of the interface plus the
// weighted patch sum on the meshed part.
struct CoupledFlux {
  ChannelGeometry geom;
  std::optional<InterfaceConfig> iface;
  BrokenRTField sigma_tilde;
};

CoupledFlux assemble_coupled_flux(std::shared_ptr<const TriMesh> mesh,
                                  const std::vector<PatchSolution>& contributions,
                                  const NodeClassification& cls, const ChannelGeometry& geom,
                                  const std::optional<InterfaceConfig>& iface);

// Everything the estimators need: the coupled flux, the interface-patch field
// alone, and the unweighted all-node sum driving the per-cell indicators.
struct FluxAssembly {
  CoupledFlux flux;
  BrokenRTField sigma_gamma;
  BrokenRTField sigma_d;
};

FluxAssembly build_flux_assembly(const ScalarField& u_tilde, const ChannelGeometry& geom,
                                 const std::optional<InterfaceConfig>& iface,
                                 const NodeClassification& cls);

struct EquilibrationReport {
  double max_div_residual = 0;  // elementwise ||div sigma - f||_T / ||f||_T
  double max_normal_jump = 0;   // interior edges and the interface
  double value() const { return std::max(max_div_residual, max_normal_jump); }
};

EquilibrationReport equilibration_residual(const CoupledFlux& flux, double f);

}  // namespace serpentine
