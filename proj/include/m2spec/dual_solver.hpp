#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "m2spec/spectra.hpp"
#include "m2spec/torus_grid.hpp"
#include "m2spec/types.hpp"

namespace m2spec {

/// Coefficients {Q_k} of a Hermitian matrix trigonometric polynomial, the
/// Lagrange multiplier of the moment constraints. Conjugate symmetry
/// Q_{-k} = Q_k^* is exact (inherited from HermitianCoeffs), and the
/// variable maps to and from a real coordinate vector of length m^2*|Lambda|
/// through a fixed orthonormal basis of the symmetric coefficient space.
///
/// Coordinate layout: first the zero-index block (diagonal real parts, then
/// for each upper pair i<j sqrt(2)*Re and sqrt(2)*Im), then for each half-set
/// index in order all entries row-major as sqrt(2)*Re, sqrt(2)*Im.
class DualVariable {
 public:
  DualVariable(IndexSet lambda, int m);  // zero variable
  explicit DualVariable(HermitianCoeffs coeffs);

  static DualVariable from_coords(const IndexSet& lambda, int m,
                                  const RealVec& x);
  RealVec coords() const;

  const HermitianCoeffs& coeffs() const { return coeffs_; }
  const IndexSet& index_set() const { return coeffs_.index_set(); }
  int m() const { return coeffs_.m(); }
  std::size_t coord_dim() const {
    return static_cast<std::size_t>(m()) * static_cast<std::size_t>(m()) *
           index_set().size();
  }

 private:
  HermitianCoeffs coeffs_;
};

/// Coordinate map shared by the variable and by coefficient-indexed
/// gradients (both live in the same symmetric coefficient space).
RealVec coeffs_to_coords(const HermitianCoeffs& coeffs);
HermitianCoeffs coords_to_coeffs(const IndexSet& lambda, int m,
                                 const RealVec& x);

/// sqrt(sum_k trace(Q_k Q_k^*)); coincides with the Euclidean norm of the
/// coordinate vector.
double q_norm(const DualVariable& q);

/// Smallest integer nu >= max(2, m*d/2 + 1): large enough that the
/// estimate is guaranteed to stay an interior (density-only) solution.
int choose_nu(int m, int d);

/// Samples of Psi^{-1} + Q/nu on the grid: the field whose positivity
/// defines the feasible set.
HermField constraint_field(const DualVariable& q, const GridDensity& psi,
                           int nu);

/// Minimum eigenvalue of the constraint field over all nodes; positive
/// exactly when Q is interior-feasible on the grid.
double feasibility_margin(const DualVariable& q, const GridDensity& psi,
                          int nu);

/// Dual objective for nu >= 2:
///   <Q, Sigma> + nu/(nu-1) * integral of trace{[Psi^{-1}(Psi^{-1}+Q/nu)^{-1}]^{nu-1}}.
double dual_objective(const DualVariable& q, const CovarianceData& sigma,
                      const GridDensity& psi, int nu);

/// Dual objective for nu = 1 (Itakura-Saito case):
///   <Q, Sigma> - integral of log det(Psi^{-1} + Q).
double dual_objective_is(const DualVariable& q, const CovarianceData& sigma,
                         const GridDensity& psi);

/// Coefficient-indexed gradient G_k = Sigma_k - moments of the primal
/// density at Q; valid for nu >= 1. The real-coordinate gradient is
/// coeffs_to_coords of this.
HermitianCoeffs dual_gradient(const DualVariable& q, const CovarianceData& sigma,
                              const GridDensity& psi, int nu);

struct SolverOptions {
  double tol_grad = 1e-8;
  int max_iters = 500;
  double interior_margin = 1e-9;  // kept as slack from the boundary
  double armijo_c1 = 1e-4;
  double backtrack_ratio = 0.5;
  double norm_cap = 1e8;
};

enum class SolverStatus {
  converged_interior,
  boundary_suspect,
  norm_cap_hit,
  max_iters,
};

std::string to_string(SolverStatus status);

/// One accepted iterate of the descent, for diagnostics and bound checks.
struct IterateRecord {
  int iter = 0;
  double objective = 0.0;
  double pairing_value = 0.0;  // <Q, Sigma> at this iterate
  double grad_norm = 0.0;
  double margin = 0.0;
  double step = 0.0;  // step length that produced this iterate (0 for start)
};

struct SolverReport {
  DualVariable q;
  double dual_value = 0.0;
  double grad_norm = 0.0;
  double feasibility_margin = 0.0;
  int iterations = 0;
  SolverStatus status = SolverStatus::max_iters;
  std::vector<IterateRecord> history;
};

/// Interior-feasible descent on the dual from Q = 0: steepest descent with a
/// Barzilai-Borwein initial step and non-monotone Armijo backtracking (the
/// sufficient-decrease test runs against the worst of the last few accepted
/// values), every trial kept at feasibility margin >= interior_margin.
/// nu = 1 runs the Itakura-Saito dual, nu >= 2 the generic one.
SolverReport solve_dual(const CovarianceData& sigma, const GridDensity& psi,
                        int nu, const SolverOptions& opts = {});

}  // namespace m2spec
