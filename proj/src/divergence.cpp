#include "m2spec/divergence.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>

#include "m2spec/errors.hpp"

namespace m2spec {

namespace {

void check_pair(const GridDensity& phi, const GridDensity& psi) {
  if (!(phi.grid() == psi.grid()))
    throw DimensionError("divergence: densities live on different grids");
  if (phi.m() != psi.m())
    throw DimensionError("divergence: densities have different matrix size");
  if (!psi.coercive())
    throw PriorInvalidError("divergence: reference density is not coercive");
}

}  // namespace

double tau_divergence(const GridDensity& phi, const GridDensity& psi,
                      double tau, FactorKind kind) {
  if (!(tau > 0.0 && tau < 1.0))
    throw DomainError("tau_divergence: tau must lie in (0,1)");
  check_pair(phi, psi);

  const int m = phi.m();
  const double c_pow = 1.0 / (tau * (tau - 1.0));
  const double c_lin = 1.0 / (tau - 1.0);
  const Mat eye = Mat::Identity(m, m);

  std::vector<double> integrand(phi.node_count());
  for (std::size_t node = 0; node < phi.node_count(); ++node) {
    const Mat w = sqrt_factor(psi.at(node), kind);
    const Mat s = w.partialPivLu().solve(eye);
    Mat ratio = s * phi.at(node) * s.adjoint();
    ratio = 0.5 * (ratio + ratio.adjoint());
    // trace(Psi^{-1} Phi) equals trace of the whitened ratio, so one
    // congruence serves both terms.
    const double lin = ratio.trace().real();
    const double pow_term = matrix_power(ratio, tau).trace().real();
    integrand[node] = c_pow * pow_term - c_lin * lin;
  }
  return quadrature(phi.grid(), integrand) + static_cast<double>(m) / tau;
}

double nu_divergence(const GridDensity& phi, const GridDensity& psi, int nu) {
  if (nu < 2)
    throw DomainError(
        "nu_divergence: nu must be >= 2 (use itakura_saito for nu = 1)");
  return tau_divergence(phi, psi, 1.0 - 1.0 / static_cast<double>(nu),
                        FactorKind::hermitian);
}

double itakura_saito(const GridDensity& phi, const GridDensity& psi) {
  check_pair(phi, psi);
  const int m = phi.m();

  Eigen::SelfAdjointEigenSolver<Mat> solver;
  std::vector<double> integrand(phi.node_count());
  for (std::size_t node = 0; node < phi.node_count(); ++node) {
    solver.compute(phi.at(node), Eigen::EigenvaluesOnly);
    if (solver.eigenvalues()[0] <= kPowerFloor)
      throw SingularityError(
          "itakura_saito: density sample is singular, log undefined");
    double logdet_phi = 0.0;
    for (int i = 0; i < m; ++i) logdet_phi += std::log(solver.eigenvalues()[i]);

    solver.compute(psi.at(node), Eigen::EigenvaluesOnly);
    double logdet_psi = 0.0;
    for (int i = 0; i < m; ++i) logdet_psi += std::log(solver.eigenvalues()[i]);

    const double lin =
        Eigen::LLT<Mat>(psi.at(node)).solve(phi.at(node)).trace().real();
    integrand[node] = logdet_psi - logdet_phi + lin;
  }
  return quadrature(phi.grid(), integrand) - static_cast<double>(m);
}

}  // namespace m2spec
