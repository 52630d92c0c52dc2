#include "m2spec/primal.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "m2spec/divergence.hpp"
#include "m2spec/errors.hpp"
#include "m2spec/herm_linalg.hpp"

namespace m2spec {

GridDensity primal_density(const DualVariable& q, const GridDensity& psi,
                           int nu) {
  if (nu < 1) throw DomainError("primal_density: nu must be >= 1");
  const HermField constraint = constraint_field(q, psi, nu);
  if (min_eig_field(constraint) <= 0.0)
    throw BoundaryError("primal_density: variable is outside the feasible set");

  const int m = psi.m();
  const Mat eye = Mat::Identity(m, m);
  std::vector<Mat> samples(psi.node_count());
  for (std::size_t node = 0; node < psi.node_count(); ++node) {
    const Mat rinv = Eigen::LLT<Mat>(constraint.at(node)).solve(eye);
    const Mat psi_inv =
        Eigen::LLT<Mat>(psi.at(node)).solve(eye);
    // nu copies of (Psi^{-1}+Q/nu)^{-1} interleaved with nu-1 copies of
    // Psi^{-1}; for nu = 1 this is just the single inverse.
    Mat prod = rinv;
    for (int k = 1; k < nu; ++k) prod = prod * psi_inv * rinv;
    samples[node] = 0.5 * (prod + prod.adjoint());
  }
  return GridDensity(HermField(psi.grid(), m, std::move(samples)));
}

MomentResiduals moment_residual(const GridDensity& phi,
                                const CovarianceData& sigma) {
  const CovarianceData moments = gamma_moments(phi.field(), sigma.index_set());
  MomentResiduals out;
  out.per_index.resize(sigma.index_set().size());
  for (std::size_t p = 0; p < sigma.index_set().size(); ++p) {
    out.per_index[p] = (moments.at(p) - sigma.at(p)).norm();
    out.max = std::max(out.max, out.per_index[p]);
  }
  return out;
}

Certificate certify(const SolverReport& report, const CovarianceData& sigma,
                    const GridDensity& psi, int nu) {
  if (report.status != SolverStatus::converged_interior)
    throw CertificateError("certify: solver did not reach an interior optimum (" +
                           to_string(report.status) + ")");

  const GridDensity phi = primal_density(report.q, psi, nu);
  const int m = psi.m();

  Certificate cert;
  cert.dual_value = report.dual_value;
  cert.feasibility_margin = report.feasibility_margin;
  cert.residuals = moment_residual(phi, sigma);

  if (nu >= 2) {
    cert.divergence = nu_divergence(phi, psi, nu);
    cert.objective_constant = static_cast<double>(m * nu) /
                              static_cast<double>(nu - 1);
  } else {
    cert.divergence = itakura_saito(phi, psi);
    // The nu = 1 dual drops the integrated log-determinant of the prior
    // instead of a rational constant; reconcile against that.
    std::vector<double> logdet(psi.node_count());
    Eigen::SelfAdjointEigenSolver<Mat> solver;
    for (std::size_t node = 0; node < psi.node_count(); ++node) {
      solver.compute(psi.at(node), Eigen::EigenvaluesOnly);
      double acc = 0.0;
      for (int i = 0; i < m; ++i) acc += std::log(solver.eigenvalues()[i]);
      logdet[node] = acc;
    }
    cert.objective_constant = quadrature(psi.grid(), logdet);
  }

  cert.gap = std::abs(cert.divergence + cert.dual_value - cert.objective_constant);
  cert.gap_tolerance = 1e-6 * (1.0 + std::abs(cert.dual_value));
  if (cert.gap > cert.gap_tolerance) {
    std::ostringstream msg;
    msg << "certify: duality gap " << cert.gap << " exceeds tolerance "
        << cert.gap_tolerance;
    throw CertificateError(msg.str());
  }
  return cert;
}

}  // namespace m2spec
