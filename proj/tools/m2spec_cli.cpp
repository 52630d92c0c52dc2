#include <cstdio>
#include <exception>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "m2spec/divergence.hpp"
#include "m2spec/dual_solver.hpp"
#include "m2spec/errors.hpp"
#include "m2spec/herm_linalg.hpp"
#include "m2spec/io.hpp"
#include "m2spec/primal.hpp"
#include "m2spec/spectra.hpp"

using namespace m2spec;
using nlohmann::json;

namespace {

struct PriorChoice {
  std::string kind = "identity";  // identity | poly:FILE | grid:FILE
  double scale = 1.0;
};

GridDensity load_prior(const PriorChoice& choice, const TorusGrid& grid,
                       int m) {
  if (choice.kind == "identity")
    return eval_prior(
        ConstantPrior{choice.scale * Mat::Identity(m, m)}, grid);
  if (choice.kind.rfind("poly:", 0) == 0)
    return eval_prior(
        InversePolyPrior{read_coeffs(choice.kind.substr(5), "polynomial")},
        grid);
  if (choice.kind.rfind("grid:", 0) == 0)
    return eval_prior(GridPrior{read_grid_density(choice.kind.substr(5))},
                      grid);
  throw DataError("unknown prior '" + choice.kind +
                  "' (expected identity, poly:FILE or grid:FILE)");
}

json residuals_to_json(const MomentResiduals& r) {
  return json{{"per_index", r.per_index}, {"max", r.max}};
}

// A deterministic interior point for gradient checking: a random direction
// scaled to keep a comfortable distance from the feasibility boundary.
DualVariable random_interior_point(std::mt19937_64& g, const IndexSet& lambda,
                                   int m, const GridDensity& psi, int nu) {
  std::normal_distribution<double> dist;
  RealVec x(static_cast<Eigen::Index>(lambda.size()) * m * m);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = dist(g);
  DualVariable raw = DualVariable::from_coords(lambda, m, x);
  const EigRange range = eig_range(eval_trig_poly(raw.coeffs(), psi.grid()));
  const double reach =
      std::max(std::abs(range.min), std::abs(range.max)) / nu;
  const double floor_psi = 1.0 / psi.upper_bound();
  const double c = reach > 0.0 ? 0.5 * floor_psi / reach : 1.0;
  x *= c;
  return DualVariable::from_coords(lambda, m, x);
}

int cmd_synth(int d, int m, int grid_n, int lambda_max, std::uint64_t seed,
              double lower, double upper, const std::string& mode,
              int realizations, const std::string& out_cov,
              const std::string& out_density) {
  const TorusGrid grid(d, grid_n);
  const IndexSet lambda = IndexSet::box(d, lambda_max);
  if (!grid.resolves(lambda))
    throw DomainError("grid too coarse: need N >= 2*lambda_max + 1");

  const GridDensity truth =
      random_coercive_density(seed, grid, m, lower, upper);
  CovarianceData sigma = [&] {
    if (mode == "moments") return gamma_moments(truth.field(), lambda);
    if (mode == "periodogram") {
      std::vector<FieldRealization> reals;
      reals.reserve(realizations);
      for (int r = 0; r < realizations; ++r)
        reals.push_back(synth_field(truth, seed * 1000003ULL + r));
      return smoothed_periodogram(reals, grid, m, lambda);
    }
    throw DataError("unknown mode '" + mode +
                    "' (expected moments or periodogram)");
  }();

  write_covariance(out_cov, sigma);
  write_grid_density(out_density, truth);
  std::cout << "wrote " << out_cov << " and " << out_density << "\n";
  return 0;
}

int cmd_estimate(const std::string& cov_path, const PriorChoice& prior,
                 int grid_n, const std::string& nu_arg,
                 const SolverOptions& opts, const std::string& out_report,
                 const std::string& out_density) {
  const CovarianceData sigma = read_covariance(cov_path);
  const IndexSet& lambda = sigma.index_set();
  const int d = lambda.dim();
  const int m = sigma.m();
  const TorusGrid grid(d, grid_n);
  if (!grid.resolves(lambda))
    throw DomainError("grid too coarse: need N >= 2*max|k| + 1");

  const GridDensity psi = load_prior(prior, grid, m);
  const int nu = nu_arg == "auto" ? choose_nu(m, d) : std::stoi(nu_arg);
  if (nu < 1) throw DomainError("nu must be >= 1");

  const SolverReport report = solve_dual(sigma, psi, nu, opts);

  json out{{"kind", "report"},
           {"config",
            {{"d", d},
             {"m", m},
             {"N", grid_n},
             {"nu", nu},
             {"prior", prior.kind},
             {"tol_grad", opts.tol_grad},
             {"max_iters", opts.max_iters}}},
           {"moment_convention", "grid-consistent moments"},
           {"status", to_string(report.status)},
           {"dual_value", report.dual_value},
           {"grad_norm", report.grad_norm},
           {"feasibility_margin", report.feasibility_margin},
           {"iterations", report.iterations},
           {"q_norm", q_norm(report.q)}};

  int rc = 0;
  if (report.status == SolverStatus::converged_interior) {
    const GridDensity phi = primal_density(report.q, psi, nu);
    const Certificate cert = certify(report, sigma, psi, nu);
    out["residuals"] = residuals_to_json(cert.residuals);
    out["certificate"] = {{"gap", cert.gap},
                          {"tolerance", cert.gap_tolerance},
                          {"divergence", cert.divergence},
                          {"constant", cert.objective_constant}};
    write_grid_density(out_density, phi);
    std::cout << "estimate: " << to_string(report.status) << ", max residual "
              << cert.residuals.max << ", gap " << cert.gap << "\n";
  } else {
    // Boundary proximity diagnostic: how many nodes sit close to the zero
    // set of the constraint field.
    const HermField constraint = constraint_field(report.q, psi, nu);
    std::size_t near = 0;
    for (const Mat& s : constraint.samples)
      if (herm_eig(s).eigenvalues[0] < 10.0 * opts.interior_margin) ++near;
    out["boundary_diagnostic"] = {{"near_singular_nodes", near}};
    std::cerr << "estimate did not certify: status " << to_string(report.status)
              << ", grad norm " << report.grad_norm << ", margin "
              << report.feasibility_margin << ", " << near
              << " node(s) near the boundary\n";
    rc = 1;
  }

  std::ofstream rep(out_report);
  if (!rep) throw IoError("cannot write file: " + out_report);
  rep << out.dump(1) << '\n';
  return rc;
}

int cmd_gradcheck(int d, int m, int nu, int grid_n, int lambda_max, int points,
                  double step, std::uint64_t seed) {
  const TorusGrid grid(d, grid_n);
  const IndexSet lambda = IndexSet::box(d, lambda_max);
  const GridDensity psi =
      eval_prior(ConstantPrior{Mat::Identity(m, m)}, grid);
  const GridDensity gen =
      random_coercive_density(seed ^ 0x9e3779b97f4a7c15ULL, grid, m, 0.5, 2.0);
  const CovarianceData sigma = gamma_moments(gen.field(), lambda);

  std::mt19937_64 g(seed);
  const auto value = [&](const DualVariable& q) {
    return nu == 1 ? dual_objective_is(q, sigma, psi)
                   : dual_objective(q, sigma, psi, nu);
  };

  double worst = 0.0;
  for (int pt = 0; pt < points; ++pt) {
    const DualVariable q = random_interior_point(g, lambda, m, psi, nu);
    const RealVec ga = coeffs_to_coords(dual_gradient(q, sigma, psi, nu));
    const RealVec x = q.coords();
    RealVec gf(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      RealVec xp = x;
      RealVec xm = x;
      xp[i] += step;
      xm[i] -= step;
      gf[i] = (value(DualVariable::from_coords(lambda, m, xp)) -
               value(DualVariable::from_coords(lambda, m, xm))) /
              (2.0 * step);
    }
    const double rel = (ga - gf).norm() / std::max(1e-12, ga.norm());
    worst = std::max(worst, rel);
    std::printf("point %2d: relative error %.3e\n", pt, rel);
  }
  std::printf("max relative error: %.3e (threshold 1e-4)\n", worst);
  if (worst > 1e-4) {
    std::cerr << "gradcheck failed\n";
    return 1;
  }
  return 0;
}

int cmd_divergence(const std::string& a_path, const std::string& b_path,
                   const std::string& which) {
  const GridDensity a = read_grid_density(a_path);
  const GridDensity b = read_grid_density(b_path);
  double value = 0.0;
  if (which == "is") {
    value = itakura_saito(a, b);
  } else if (which.rfind("tau=", 0) == 0) {
    value = tau_divergence(a, b, std::stod(which.substr(4)));
  } else if (which.rfind("nu=", 0) == 0) {
    value = nu_divergence(a, b, std::stoi(which.substr(3)));
  } else {
    throw DataError("unknown divergence '" + which +
                    "' (expected tau=T, nu=N or is)");
  }
  std::printf("%.12g\n", value);
  return 0;
}

int cmd_verify(const std::string& cov_path, const std::string& density_path,
               double tol) {
  const CovarianceData sigma = read_covariance(cov_path);
  const GridDensity phi = read_grid_density(density_path);
  const MomentResiduals r = moment_residual(phi, sigma);
  std::printf("max residual: %.6e (tolerance %.1e)\n", r.max, tol);
  if (r.max > tol) {
    std::cerr << "verify failed: moments do not match\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"M2 spectral estimation from covariance moments"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate synthetic data");
  int d = 2, m = 2, grid_n = 16, lambda_max = 1, realizations = 100;
  std::uint64_t seed = 1;
  double lower = 0.5, upper = 2.0;
  std::string mode = "moments", out_cov = "sigma.json",
              out_density = "truth.mgrd";
  synth->add_option("--d", d, "torus dimension");
  synth->add_option("--m", m, "matrix dimension");
  synth->add_option("--grid-n", grid_n, "grid points per axis");
  synth->add_option("--lambda-max", lambda_max, "moment index bound per axis");
  synth->add_option("--seed", seed, "random seed");
  synth->add_option("--lower", lower, "eigenvalue lower bound");
  synth->add_option("--upper", upper, "eigenvalue upper bound");
  synth->add_option("--mode", mode, "moments | periodogram");
  synth->add_option("--realizations", realizations,
                    "periodogram realization count");
  synth->add_option("--out-cov", out_cov, "covariance output path");
  synth->add_option("--out-density", out_density, "density output path");

  // estimate
  auto* estimate = app.add_subcommand("estimate", "estimate a density");
  std::string cov_path = "sigma.json", nu_arg = "auto",
              out_report = "report.json", out_phi = "phi.mgrd";
  PriorChoice prior;
  SolverOptions opts;
  estimate->add_option("--cov", cov_path, "covariance input path");
  estimate->add_option("--grid-n", grid_n, "grid points per axis");
  estimate->add_option("--prior", prior.kind,
                       "identity | poly:FILE | grid:FILE");
  estimate->add_option("--prior-scale", prior.scale,
                       "scale for the identity prior");
  estimate->add_option("--nu", nu_arg, "divergence order or 'auto'");
  estimate->add_option("--tol-grad", opts.tol_grad, "gradient tolerance");
  estimate->add_option("--max-iters", opts.max_iters, "iteration cap");
  estimate->add_option("--norm-cap", opts.norm_cap, "dual norm cap");
  estimate->add_option("--out-report", out_report, "report output path");
  estimate->add_option("--out-density", out_phi, "density output path");

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check");
  int gc_nu = 2, points = 20;
  double step = 1e-5;
  gradcheck->add_option("--d", d, "torus dimension");
  gradcheck->add_option("--m", m, "matrix dimension");
  gradcheck->add_option("--nu", gc_nu, "divergence order (1 for log form)");
  gradcheck->add_option("--grid-n", grid_n, "grid points per axis");
  gradcheck->add_option("--lambda-max", lambda_max,
                        "moment index bound per axis");
  gradcheck->add_option("--points", points, "number of test points");
  gradcheck->add_option("--step", step, "finite-difference step");
  gradcheck->add_option("--seed", seed, "random seed");

  // divergence
  auto* divergence = app.add_subcommand("divergence",
                                        "divergence between two densities");
  std::string a_path, b_path, which = "tau=0.5";
  divergence->add_option("--a", a_path, "first density file")->required();
  divergence->add_option("--b", b_path, "second (reference) density file")
      ->required();
  divergence->add_option("--which", which, "tau=T | nu=N | is");

  // verify
  auto* verify = app.add_subcommand("verify",
                                    "re-check a density against covariances");
  double tol = 1e-6;
  verify->add_option("--cov", cov_path, "covariance input path");
  verify->add_option("--density", out_phi, "density input path");
  verify->add_option("--tol", tol, "residual tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed())
      return cmd_synth(d, m, grid_n, lambda_max, seed, lower, upper, mode,
                       realizations, out_cov, out_density);
    if (estimate->parsed())
      return cmd_estimate(cov_path, prior, grid_n, nu_arg, opts, out_report,
                          out_phi);
    if (gradcheck->parsed())
      return cmd_gradcheck(d, m, gc_nu, grid_n, lambda_max, points, step, seed);
    if (divergence->parsed()) return cmd_divergence(a_path, b_path, which);
    if (verify->parsed()) return cmd_verify(cov_path, out_phi, tol);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
