#pragma once

#include "m2spec/herm_linalg.hpp"
#include "m2spec/spectra.hpp"

namespace m2spec {

/// Divergence family between a PSD density and a coercive reference,
/// indexed by tau in (0,1). The value does not depend on which square-root
/// factor of the reference is used.
double tau_divergence(const GridDensity& phi, const GridDensity& psi,
                      double tau, FactorKind kind = FactorKind::hermitian);

/// The same family at tau = 1 - 1/nu for integer nu >= 2, the form the
/// estimator optimizes.
double nu_divergence(const GridDensity& phi, const GridDensity& psi, int nu);

/// Itakura-Saito divergence, the tau -> 0 limit; requires phi positive
/// definite at every node.
double itakura_saito(const GridDensity& phi, const GridDensity& psi);

}  // namespace m2spec
