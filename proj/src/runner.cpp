#include "serpentine/runner.hpp"

#include "serpentine/io.hpp"
#include "serpentine/quadrature.hpp"
#include "serpentine/rt_basis.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace serpentine {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// reliability slack: eta must not undershoot the measured error by more than
// the reference-discretization allowance
constexpr double kReliabilitySlack = 0.98;

}  // namespace

SolvedCase run_case(const ChannelGeometry& geom, double x_gamma, double target_h, int degree) {
  SolvedCase c;
  const InterfaceConfig iface = make_interface(geom, x_gamma);
  c.mesh = std::make_shared<TriMesh>(
      triangulate(reduced_domain_polygon(geom, iface), target_h));
  c.solution = solve_coupled(geom, iface, c.mesh, degree);
  c.cls = classify_nodes(*c.solution.u_tilde.space, geom, iface);
  c.flux = build_flux_assembly(c.solution.u_tilde, geom, iface, c.cls);
  c.report.eta = eta_total(c.flux.flux, c.solution);
  c.report.eta_gamma = eta_gamma(c.flux.sigma_gamma, c.solution.u_tilde, c.cls);
  c.report.eta_d_per_cell = eta_d_per_element(c.flux.sigma_d, c.solution.u_tilde);
  c.report.eta_d = std::sqrt(c.report.eta_d_per_cell.squaredNorm());
  c.report.n_dof = c.solution.u_tilde.space->n_dofs;
  c.report.x_gamma = x_gamma;
  c.report.h_max = c.mesh->h_max();
  return c;
}

Eigen::VectorXd eta_per_element(const CoupledFlux& flux, const CoupledSolution& coupled) {
  const ScalarField& u = coupled.u_tilde;
  const LagrangeSpace& space = *u.space;
  const TriMesh& mesh = *space.mesh;
  const int k = space.degree;
  const auto& rule = triangle_rule(2 * k + 2);
  const int nq = static_cast<int>(rule.weights.size());
  std::vector<Eigen::MatrixX3d> bg(nq);
  for (int q = 0; q < nq; ++q) shape_bary_gradients(k, rule.points.col(q), bg[q]);

  Eigen::VectorXd density(mesh.n_triangles());
  Eigen::Matrix2Xd phi;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const RTElementBasis basis(mesh, t, k);
    const auto& tri = mesh.triangles[t];
    const auto g3 = space.p1_gradients(t);
    const auto& dofs = space.element_dofs[t];
    double cell = 0.0;
    for (int q = 0; q < nq; ++q) {
      const Eigen::Vector3d b = rule.points.col(q);
      const Vec2 x = b[0] * mesh.vertices[tri[0]] + b[1] * mesh.vertices[tri[1]] +
                     b[2] * mesh.vertices[tri[2]];
      basis.eval(x, phi);
      Eigen::Vector2d grad_u = Eigen::Vector2d::Zero();
      for (int i = 0; i < space.dofs_per_element; ++i)
        grad_u += u.coeffs[dofs[i]] * (bg[q].row(i) * g3).transpose();
      cell += rule.weights[q] * mesh.area_tri[t] *
              (Eigen::Vector2d(phi * flux.sigma_tilde.coeffs.col(t)) + grad_u).squaredNorm();
    }
    density[t] = std::sqrt(cell);
  }
  return density;
}

ScalarField load_reference(const std::string& prefix) {
  auto mesh = std::make_shared<TriMesh>(read_mesh_file(prefix + ".mesh"));
  int degree = 0;
  Eigen::VectorXd coeffs;
  read_field_file(prefix + ".field", degree, coeffs);
  auto space = build_space(std::move(mesh), degree);
  if (coeffs.size() != space->n_dofs)
    throw std::runtime_error("load_reference: field size does not match the mesh");
  return ScalarField{std::move(space), std::move(coeffs)};
}

namespace {

void write_reference(const std::string& out_dir, const TriMesh& mesh, const ScalarField& u) {
  write_mesh_file(out_dir + "/reference.mesh", mesh);
  write_field_file(out_dir + "/reference.field", u.space->degree, u.coeffs);
  write_vtk_point_scalars(out_dir + "/reference.vtk", mesh, "u",
                          u.coeffs.head(mesh.n_vertices()));
}

int run_reference(const ExperimentConfig& cfg, const ChannelGeometry& geom,
                  const std::string& out_dir, bool quiet) {
  if (cfg.reference_tol > 0.0) {
    AdaptiveConfig knobs = cfg.adaptive;
    knobs.tol = cfg.reference_tol;
    knobs.tol_gamma = 0.0;
    knobs.degree = cfg.degree;
    const ReferenceResult ref = adaptive_reference(geom, knobs);
    if (!quiet)
      std::cout << "reference: " << ref.history.size() << " meshes, final eta "
                << format_real(ref.history.back().eta) << ", dof "
                << ref.history.back().n_dof << '\n';
    write_reference(out_dir, *ref.mesh, ref.field);
    return ref.converged ? 0 : 4;
  }
  auto mesh =
      std::make_shared<TriMesh>(triangulate(full_domain_polygon(geom), cfg.reference_h));
  const ScalarField u = solve_reference(geom, mesh, cfg.degree);
  if (!quiet)
    std::cout << "reference: quasi-uniform h_max " << format_real(mesh->h_max()) << ", dof "
              << u.space->n_dofs << '\n';
  write_reference(out_dir, *mesh, u);
  return 0;
}

struct RowOutcome {
  std::optional<double> error;
  std::optional<double> eff;
  bool reliability_violated = false;
};

RowOutcome error_columns(const SolvedCase& c, const ScalarField* reference) {
  RowOutcome out;
  if (!reference) return out;
  out.error = energy_norm_error(c.solution, *reference);
  out.eff = effectivity(out.error, c.report.eta);
  if (*out.error > 0.0 && c.report.eta < kReliabilitySlack * *out.error) {
    std::cerr << "reliability violated: eta " << format_real(c.report.eta) << " < "
              << kReliabilitySlack << " * error " << format_real(*out.error) << " at x_gamma "
              << c.report.x_gamma << ", h_max " << c.report.h_max << '\n';
    out.reliability_violated = true;
  }
  return out;
}

double opt(const std::optional<double>& v) { return v ? *v : kNan; }

}  // namespace

int run_experiment(const ExperimentConfig& cfg, const std::string& out_dir_override,
                   bool quiet) {
  const ChannelGeometry geom = cfg.geometry();
  const std::string out_dir = out_dir_override.empty() ? cfg.out_dir : out_dir_override;
  std::filesystem::create_directories(out_dir);

  std::optional<ScalarField> reference;
  const bool needs_reference =
      cfg.kind == RunKind::SweepInterface || cfg.kind == RunKind::SweepMesh;
  if (!cfg.reference_path.empty())
    reference = load_reference(cfg.reference_path);
  else if (needs_reference)
    throw std::runtime_error("this run kind requires [run] reference = <prefix>");

  int status = 0;
  auto note_violation = [&status](const RowOutcome& row) {
    if (row.reliability_violated) status = 2;
  };

  switch (cfg.kind) {
    case RunKind::Reference:
      return run_reference(cfg, geom, out_dir, quiet);

    case RunKind::SweepInterface: {
      if (cfg.sweep_x_gamma.empty())
        throw std::runtime_error("[sweep_interface] x_gamma list is empty");
      CsvWriter csv(out_dir + "/sweep_interface.csv",
                    "x_gamma,h_max,dof,error,eta,eta_gamma,eff_index", !quiet);
      for (const double xg : cfg.sweep_x_gamma) {
        const SolvedCase c = run_case(geom, xg, cfg.sweep_h, cfg.degree);
        const RowOutcome row = error_columns(c, reference ? &*reference : nullptr);
        note_violation(row);
        csv.row({xg, c.report.h_max, static_cast<double>(c.report.n_dof), opt(row.error),
                 c.report.eta, c.report.eta_gamma, opt(row.eff)},
                {2});
      }
      return status;
    }

    case RunKind::SweepMesh: {
      if (cfg.sweep_h_list.empty()) throw std::runtime_error("[sweep_mesh] h list is empty");
      CsvWriter csv(out_dir + "/sweep_mesh.csv", "h_max,dof,error,eta,eta_gamma,eff_index",
                    !quiet);
      for (const double h : cfg.sweep_h_list) {
        const SolvedCase c = run_case(geom, cfg.sweep_x_gamma_fixed, h, cfg.degree);
        const RowOutcome row = error_columns(c, reference ? &*reference : nullptr);
        note_violation(row);
        csv.row({c.report.h_max, static_cast<double>(c.report.n_dof), opt(row.error),
                 c.report.eta, c.report.eta_gamma, opt(row.eff)},
                {1});
      }
      return status;
    }

    case RunKind::Adaptive: {
      AdaptiveConfig knobs = cfg.adaptive;
      knobs.degree = cfg.degree;
      const InterfaceSearchResult placement = choose_interface(geom, knobs);
      if (!placement.converged) {
        std::cerr << "interface placement failed: eta_gamma above tolerance for all "
                     "positions down to the inlet\n";
        return 3;
      }
      const AdaptiveResult result =
          adaptive_solve(geom, make_interface(geom, placement.x_gamma), knobs);
      CsvWriter csv(out_dir + "/adaptive.csv", "iter,x_gamma,dof,error,eta,eta_gamma,eff_index",
                    !quiet);
      for (std::size_t i = 0; i < result.history.size(); ++i) {
        const EstimatorReport& rep = result.history[i];
        std::optional<double> err, eff;
        if (reference) {
          err = energy_norm_error(result.iterates[i], *reference);
          eff = effectivity(err, rep.eta);
          if (*err > 0.0 && rep.eta < kReliabilitySlack * *err) status = 2;
        }
        csv.row({static_cast<double>(rep.iteration), rep.x_gamma,
                 static_cast<double>(rep.n_dof), opt(err), rep.eta, rep.eta_gamma, opt(eff)},
                {0, 2});
      }
      if (!result.converged) {
        std::cerr << "adaptation stopped at max_iters with eta above tol\n";
        if (status == 0) status = 4;
      }
      return status;
    }

    case RunKind::Single: {
      const SolvedCase c = run_case(geom, cfg.single_x_gamma, cfg.single_h, cfg.degree);
      const RowOutcome row = error_columns(c, reference ? &*reference : nullptr);
      note_violation(row);
      CsvWriter csv(out_dir + "/single.csv", "x_gamma,h_max,dof,error,eta,eta_gamma,eff_index",
                    !quiet);
      csv.row({c.report.x_gamma, c.report.h_max, static_cast<double>(c.report.n_dof),
               opt(row.error), c.report.eta, c.report.eta_gamma, opt(row.eff)},
              {2});
      write_vtk_point_scalars(out_dir + "/solution.vtk", *c.mesh, "u",
                              c.solution.u_tilde.coeffs.head(c.mesh->n_vertices()));
      write_vtk_cell_scalars(out_dir + "/estimator_density.vtk", *c.mesh, "eta_T",
                             eta_per_element(c.flux.flux, c.solution));
      write_mesh_file(out_dir + "/single.mesh", *c.mesh);
      return status;
    }
  }
  return 1;
}

}  // namespace serpentine
