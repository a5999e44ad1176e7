#include "serpentine/adapt.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace serpentine {

AdaptiveConfig AdaptiveConfig::filled(const ChannelGeometry& geom) const {
  AdaptiveConfig c = *this;
  if (c.tol_gamma == 0.0) c.tol_gamma = 0.1 * c.tol;
  if (c.coarse_h == 0.0) c.coarse_h = geom.width / 3.0;
  if (!(c.tol > 0) || !(c.tol_gamma > 0) || !(c.tol_gamma < c.tol))
    throw std::invalid_argument("AdaptiveConfig: need 0 < tol_gamma < tol");
  if (!(c.dx > 0)) throw std::invalid_argument("AdaptiveConfig: dx must be positive");
  if (!(c.delta >= 1.0)) throw std::invalid_argument("AdaptiveConfig: delta must be >= 1");
  if (!(c.re > 1.0)) throw std::invalid_argument("AdaptiveConfig: Re must exceed 1");
  if (!(c.coarse_h > 0) || c.max_iters < 1)
    throw std::invalid_argument("AdaptiveConfig: bad coarse_h or max_iters");
  return c;
}

double SizeField::operator()(const Vec2& x) const {
  auto loc = locator->locate(x, 1e-9);
  if (!loc.found()) loc = serpentine::locate(*mesh, x, 1e-7);
  if (!loc.found()) throw std::runtime_error("SizeField: point outside the snapshot mesh");
  return h_opt[loc.triangle];
}

SizeField hopt_size_field(std::shared_ptr<const TriMesh> mesh,
                          const Eigen::VectorXd& eta_d_cells, double delta, double re,
                          double h_floor) {
  const int nt = mesh->n_triangles();
  if (eta_d_cells.size() != nt)
    throw std::invalid_argument("hopt_size_field: one indicator per element required");
  if ((eta_d_cells.array() < 0.0).any())
    throw std::invalid_argument("hopt_size_field: indicators must be non-negative");

  SizeField field;
  field.h_opt.resize(nt);
  const double eta_d = std::sqrt(eta_d_cells.squaredNorm());
  if (eta_d == 0.0) {
    std::cerr << "hopt_size_field: all indicators vanish, keeping current sizes\n";
    field.h_opt = mesh->h_tri;
    field.target_error = 0.0;
  } else {
    const double eps = eta_d / re;
    field.target_error = eps;
    double den = 0.0;
    for (int t = 0; t < nt; ++t) {
      if (eta_d_cells[t] == 0.0) continue;
      den += std::pow(eta_d_cells[t], 2.0 / (delta + 1.0)) *
             std::pow(mesh->h_tri[t], -2.0 * delta / (delta + 1.0)) *
             std::pow(mesh->area_tri[t], delta / (delta + 1.0));
    }
    const double factor = std::pow(eps, 1.0 / delta) / std::pow(den, 1.0 / (2.0 * delta));
    for (int t = 0; t < nt; ++t) {
      if (eta_d_cells[t] == 0.0) {
        field.h_opt[t] = 2.0 * mesh->h_tri[t];  // nothing to refine here
      } else {
        field.h_opt[t] = factor * std::pow(mesh->h_tri[t], delta / (delta + 1.0)) *
                         std::pow(mesh->area_tri[t], 1.0 / (2.0 * delta + 2.0)) /
                         std::pow(eta_d_cells[t], 1.0 / (delta + 1.0));
      }
      field.h_opt[t] = std::max(field.h_opt[t], h_floor);
    }
  }
  field.locator = std::make_shared<PointLocator>(*mesh);
  field.mesh = std::move(mesh);
  return field;
}

namespace {

// eta_gamma on a coarse mesh at one interface position (only the interface
// patch is solved; the node patches do not enter the indicator).
double coarse_eta_gamma(const ChannelGeometry& geom, const InterfaceConfig& iface,
                        const AdaptiveConfig& cfg) {
  auto mesh = std::make_shared<TriMesh>(
      triangulate(reduced_domain_polygon(geom, iface), cfg.coarse_h));
  const CoupledSolution sol = solve_coupled(geom, iface, mesh, cfg.degree);
  const NodeClassification cls = classify_nodes(*sol.u_tilde.space, geom, iface);
  const PatchFactory factory(*sol.u_tilde.space, cls);
  const PatchSolution gp =
      solve_patch(factory.gamma_patch(), sol.u_tilde, source_term(geom));
  BrokenRTField sigma_gamma = zero_rt_field(mesh, cfg.degree);
  for (std::size_t ti = 0; ti < gp.elements.size(); ++ti)
    sigma_gamma.coeffs.col(gp.elements[ti]) = gp.flux.col(static_cast<Eigen::Index>(ti));
  return eta_gamma(sigma_gamma, sol.u_tilde, cls);
}

}  // namespace

InterfaceSearchResult choose_interface(const ChannelGeometry& geom,
                                       const AdaptiveConfig& config) {
  const AdaptiveConfig cfg = config.filled(geom);
  InterfaceSearchResult res;
  const double start = geom.length - geom.width;
  for (int step = 0;; ++step) {
    const double x = start - step * cfg.dx;
    if (!(x > 0.0)) {
      res.converged = false;
      return res;
    }
    const double eg = coarse_eta_gamma(geom, make_interface(geom, x), cfg);
    res.x_gamma = x;
    res.trace.emplace_back(x, eg);
    if (eg <= cfg.tol_gamma) {
      res.converged = true;
      return res;
    }
  }
}

AdaptiveResult adaptive_solve(const ChannelGeometry& geom, const InterfaceConfig& iface,
                              const AdaptiveConfig& config) {
  const AdaptiveConfig cfg = config.filled(geom);
  AdaptiveResult res;
  const auto coarse = std::make_shared<TriMesh>(
      triangulate(reduced_domain_polygon(geom, iface), cfg.coarse_h));
  std::shared_ptr<const TriMesh> current = coarse;

  for (int iter = 0;; ++iter) {
    CoupledSolution sol = solve_coupled(geom, iface, current, cfg.degree);
    NodeClassification cls = classify_nodes(*sol.u_tilde.space, geom, iface);
    FluxAssembly flux = build_flux_assembly(sol.u_tilde, geom, iface, cls);

    EstimatorReport rep;
    rep.iteration = iter;
    rep.eta = eta_total(flux.flux, sol);
    rep.eta_gamma = eta_gamma(flux.sigma_gamma, sol.u_tilde, cls);
    rep.eta_d_per_cell = eta_d_per_element(flux.sigma_d, sol.u_tilde);
    rep.eta_d = std::sqrt(rep.eta_d_per_cell.squaredNorm());
    rep.n_dof = sol.u_tilde.space->n_dofs;
    rep.x_gamma = iface.x_gamma;
    rep.h_max = current->h_max();
    res.history.push_back(rep);
    res.iterates.push_back(sol);

    const bool done = rep.eta <= cfg.tol;
    if (done || iter >= cfg.max_iters) {
      res.converged = done;
      res.mesh = current;
      res.cls = std::move(cls);
      res.flux = std::move(flux);
      return res;
    }

    const SizeField size = hopt_size_field(current, rep.eta_d_per_cell, cfg.delta, cfg.re,
                                           cfg.h_floor);
    current = std::make_shared<TriMesh>(refine_to_size_field(
        *coarse, [&size](const Vec2& x) { return size(x); }, cfg.h_floor, cfg.max_elements));
  }
}

ReferenceResult adaptive_reference(const ChannelGeometry& geom, const AdaptiveConfig& config) {
  const AdaptiveConfig cfg = config.filled(geom);
  ReferenceResult res;
  const auto coarse =
      std::make_shared<TriMesh>(triangulate(full_domain_polygon(geom), cfg.coarse_h));
  std::shared_ptr<const TriMesh> current = coarse;

  for (int iter = 0;; ++iter) {
    ScalarField u = solve_reference(geom, current, cfg.degree);
    NodeClassification cls = classify_nodes(*u.space, geom, std::nullopt);
    FluxAssembly flux = build_flux_assembly(u, geom, std::nullopt, cls);

    EstimatorReport rep;
    rep.iteration = iter;
    rep.eta_d_per_cell = eta_d_per_element(flux.sigma_d, u);
    rep.eta_d = std::sqrt(rep.eta_d_per_cell.squaredNorm());
    rep.eta = rep.eta_d;  // without an interface the two fields coincide
    rep.n_dof = u.space->n_dofs;
    rep.h_max = current->h_max();
    res.history.push_back(rep);

    const bool done = rep.eta <= cfg.tol;
    if (done || iter >= cfg.max_iters) {
      res.converged = done;
      res.mesh = current;
      res.field = std::move(u);
      return res;
    }

    const SizeField size = hopt_size_field(current, rep.eta_d_per_cell, cfg.delta, cfg.re,
                                           cfg.h_floor);
    current = std::make_shared<TriMesh>(refine_to_size_field(
        *coarse, [&size](const Vec2& x) { return size(x); }, cfg.h_floor, cfg.max_elements));
  }
}

}  // namespace serpentine
