#pragma once

#include <vector>

#include "m2spec/dual_solver.hpp"
#include "m2spec/spectra.hpp"

namespace m2spec {

/// Primal density recovered from a dual variable:
///   Phi_nu = Psi * [(Psi^{-1} + Q/nu) * Psi]^{-nu}
/// evaluated per node in product form, nu copies of (Psi^{-1}+Q/nu)^{-1}
/// interleaved with nu-1 copies of Psi^{-1}; Hermitian positive definite at
/// every node when Q is interior-feasible.
GridDensity primal_density(const DualVariable& q, const GridDensity& psi,
                           int nu);

struct MomentResiduals {
  std::vector<double> per_index;  // Frobenius norms, aligned with Lambda
  double max = 0.0;
};

/// Frobenius distance between the moments of a density and given covariance
/// data, per index and overall.
MomentResiduals moment_residual(const GridDensity& phi,
                                const CovarianceData& sigma);

/// Primal-dual certificate for a converged interior solve. The divergence
/// of the recovered density and the dual optimum must close the duality gap
/// up to the additive constant of the objective (m*nu/(nu-1) for nu >= 2,
/// the integrated log-determinant of the prior for nu = 1).
struct Certificate {
  double gap = 0.0;
  double gap_tolerance = 0.0;
  double dual_value = 0.0;
  double divergence = 0.0;
  double objective_constant = 0.0;
  double feasibility_margin = 0.0;
  MomentResiduals residuals;
};

/// Verifies complementarity for a converged-interior report; throws
/// CertificateError when the report did not converge or the gap exceeds
/// 1e-6 * (1 + |dual value|).
Certificate certify(const SolverReport& report, const CovarianceData& sigma,
                    const GridDensity& psi, int nu);

}  // namespace m2spec
