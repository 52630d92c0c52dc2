#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "m2spec/torus_grid.hpp"
#include "m2spec/types.hpp"

namespace m2spec {

/// A positive semidefinite Hermitian matrix field on a torus grid. The
/// eigenvalue range over all nodes is measured once at construction; the
/// density is coercive when the measured minimum is strictly positive.
class GridDensity {
 public:
  explicit GridDensity(HermField field);

  const HermField& field() const { return field_; }
  const TorusGrid& grid() const { return field_.grid; }
  int m() const { return field_.m; }
  const Mat& at(std::size_t node) const { return field_.at(node); }
  std::size_t node_count() const { return field_.grid.node_count(); }

  /// Measured lower eigenvalue bound a (over all nodes).
  double lower_bound() const { return min_eig_; }
  /// Measured upper eigenvalue bound b (over all nodes).
  double upper_bound() const { return max_eig_; }
  bool coercive() const { return min_eig_ > 0.0; }

 private:
  HermField field_;
  double min_eig_;
  double max_eig_;
};

/// Prior specification: a constant positive definite matrix, the inverse of
/// a strictly positive matrix trigonometric polynomial, or explicit samples.
struct ConstantPrior {
  Mat value;
};
struct InversePolyPrior {
  HermitianCoeffs poly;
};
struct GridPrior {
  GridDensity density;
};
using PriorSpec = std::variant<ConstantPrior, InversePolyPrior, GridPrior>;

/// Samples the prior on the grid and verifies it is bounded and coercive.
GridDensity eval_prior(const PriorSpec& spec, const TorusGrid& grid);

/// Random smooth density with a*I <= Phi(theta) <= b*I at every node:
/// a*I plus a scaled T(theta) T(theta)^dagger with T a random bandlimited
/// (per-axis degree <= 1) matrix polynomial. Deterministic given the seed.
GridDensity random_coercive_density(std::uint64_t seed, const TorusGrid& grid,
                                    int m, double a, double b);

/// One realization of a stationary field on the grid lattice: a complex
/// m-vector per lattice point, node-major.
using FieldRealization = std::vector<Vec>;

/// Spectral sampling of a zero-mean stationary Gaussian field with density
/// Phi: independent standard complex Gaussian vectors per node, colored by
/// the Hermitian square root of Phi, then an inverse transform to the
/// lattice. Deterministic given the seed.
FieldRealization synth_field(const GridDensity& phi, std::uint64_t seed);

/// Mean of the matricial periodograms of the realizations; positive
/// semidefinite by construction.
GridDensity averaged_periodogram(std::span<const FieldRealization> realizations,
                                 const TorusGrid& grid, int m);

/// Moments of the averaged periodogram: feasible covariance data by
/// construction.
CovarianceData smoothed_periodogram(std::span<const FieldRealization> realizations,
                                    const TorusGrid& grid, int m,
                                    const IndexSet& lambda);

}  // namespace m2spec
