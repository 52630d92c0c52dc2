#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "m2spec/index_set.hpp"
#include "m2spec/types.hpp"

namespace m2spec {

/// Uniform tensor grid on the d-torus with the same number of points N on
/// every axis. Node angles are theta_n = 2*pi*n/N, n = 0..N-1; nodes are
/// ordered lexicographically in the per-axis indices (first axis most
/// significant). Quadrature against the normalized Lebesgue measure is the
/// arithmetic mean over nodes, exact for trigonometric polynomials of
/// per-axis degree up to N-1.
class TorusGrid {
 public:
  TorusGrid(int dim, int points_per_axis);

  int dim() const { return dim_; }
  int points_per_axis() const { return n_; }
  std::size_t node_count() const { return node_count_; }
  double weight() const { return 1.0 / static_cast<double>(node_count_); }

  /// Per-axis integer coordinates of a node (lexicographic unflatten).
  void node_coords(std::size_t node, std::span<int> out) const;
  /// Angle of a single per-axis coordinate.
  double angle(int axis_coord) const;
  std::vector<double> node_angles(std::size_t node) const;

  /// All exponentials e^{i<k,theta>} with k in the set are exactly
  /// resolvable by this grid's quadrature.
  bool resolves(const IndexSet& lambda) const {
    return n_ >= 2 * lambda.max_abs_component() + 1;
  }

  bool operator==(const TorusGrid& other) const {
    return dim_ == other.dim_ && n_ == other.n_;
  }

 private:
  int dim_;
  int n_;
  std::size_t node_count_;
};

/// Weighted mean of scalar samples, one per node.
double quadrature(const TorusGrid& grid, std::span<const double> field);
Cplx quadrature(const TorusGrid& grid, std::span<const Cplx> field);

/// Samples of an m-by-m Hermitian matrix field on a grid, node-major.
struct HermField {
  TorusGrid grid;
  int m = 0;
  std::vector<Mat> samples;

  HermField(TorusGrid g, int m_, std::vector<Mat> s);
  const Mat& at(std::size_t node) const { return samples[node]; }
};

/// Coefficient set {A_k} over an index set with the conjugate symmetry
/// A_{-k} = A_k^*. Storage is aligned with the index set's order; the
/// symmetry is enforced exactly by mirroring the half set on construction.
class HermitianCoeffs {
 public:
  /// Validates the symmetry within `tol` (relative to coefficient scale),
  /// then re-mirrors so that it holds exactly.
  HermitianCoeffs(IndexSet lambda, std::vector<Mat> coeffs, double tol = 1e-9);

  static HermitianCoeffs zero(IndexSet lambda, int m);

  const IndexSet& index_set() const { return lambda_; }
  int m() const { return m_; }
  const Mat& at(std::size_t pos) const { return coeffs_[pos]; }
  const std::vector<Mat>& coeffs() const { return coeffs_; }

 private:
  HermitianCoeffs() = default;
  friend HermitianCoeffs mirror_half_set(IndexSet lambda, int m,
                                         const Mat& zero_coeff,
                                         std::span<const Mat> half_coeffs);
  IndexSet lambda_{1, {MultiIndex{0}}};
  int m_ = 0;
  std::vector<Mat> coeffs_;
};

/// Builds a coefficient set from the zero coefficient (hermitized) and the
/// coefficients on the half set, mirroring negatives exactly.
HermitianCoeffs mirror_half_set(IndexSet lambda, int m, const Mat& zero_coeff,
                                std::span<const Mat> half_coeffs);

/// Covariance data shares the structure and symmetry of a coefficient set.
using CovarianceData = HermitianCoeffs;

/// Phase table e^{i<k,theta_n>} for all k in the set and all grid nodes,
/// with the exact conjugate symmetry phase(-k, n) = conj(phase(k, n)).
class PhaseTable {
 public:
  PhaseTable(const TorusGrid& grid, const IndexSet& lambda);

  Cplx at(std::size_t k_pos, std::size_t node) const {
    return table_[k_pos * nodes_ + node];
  }

 private:
  std::size_t nodes_;
  std::vector<Cplx> table_;
};

/// Samples sum_k A_k e^{-i<k,theta>} on the grid. Coefficient symmetry is
/// guaranteed by HermitianCoeffs, so every sample is exactly Hermitian.
HermField eval_trig_poly(const HermitianCoeffs& coeffs, const TorusGrid& grid);

/// Moment operator: Sigma_k = integral of e^{i<k,theta>} times the field,
/// one coefficient per index in `lambda`. The output satisfies
/// Sigma_{-k} = Sigma_k^* exactly.
CovarianceData gamma_moments(const HermField& field, const IndexSet& lambda);

}  // namespace m2spec
