#pragma once

#include "m2spec/torus_grid.hpp"
#include "m2spec/types.hpp"

namespace m2spec {

/// Relative tolerance for accepting a matrix as Hermitian.
inline constexpr double kHermRelTol = 1e-12;
/// Eigenvalues in [-kEigClip, 0) are treated as round-off and clipped to 0.
inline constexpr double kEigClip = 1e-10;
/// Smallest eigenvalue allowed under a negative matrix power.
inline constexpr double kPowerFloor = 1e-12;

/// Validates that `a` is Hermitian within kHermRelTol relative to its scale,
/// then returns the exactly symmetrized (A + A^dagger)/2.
Mat hermitized(const Mat& a, const char* what = "matrix");

struct HermEig {
  RealVec eigenvalues;  // ascending
  Mat eigenvectors;     // unitary, columns match eigenvalue order
};

/// Eigendecomposition of a Hermitian matrix, A = U diag(lambda) U^dagger.
HermEig herm_eig(const Mat& a);

/// Real matrix power of a positive semidefinite Hermitian matrix via its
/// eigendecomposition. Negative exponents require the matrix to be safely
/// invertible (all eigenvalues above kPowerFloor).
Mat matrix_power(const Mat& a, double c);

enum class FactorKind { hermitian, cholesky };

/// A factor W with W W^dagger = A for positive definite A: either the
/// Hermitian square root or the lower-triangular Cholesky factor.
Mat sqrt_factor(const Mat& a, FactorKind kind);

struct EigRange {
  double min = 0.0;
  double max = 0.0;
};

/// Smallest and largest eigenvalue over all nodes of a Hermitian field.
EigRange eig_range(const HermField& field);

/// Smallest eigenvalue over all nodes of a Hermitian field.
double min_eig_field(const HermField& field);

/// Sum over k of trace(A_k B_k^dagger) for two coefficient sets on the same
/// index set. Conjugate symmetry of both operands makes the value real; the
/// vanishing imaginary residue is checked and dropped.
double pairing(const HermitianCoeffs& a, const HermitianCoeffs& b);

}  // namespace m2spec
