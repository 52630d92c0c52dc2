#include "m2spec/torus_grid.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "m2spec/errors.hpp"

namespace m2spec {

namespace {

// (A + A^dagger)/2, exactly Hermitian in floating point: real componentwise
// operations commute with conjugation, and x/2 is exact in binary.
Mat hermitize_exact(const Mat& a) { return 0.5 * (a + a.adjoint()); }

// Lexicographic per-axis coordinates for every node, first axis most
// significant. Shared by the phase table and callers that need angles.
std::vector<int> all_node_coords(const TorusGrid& grid) {
  const int d = grid.dim();
  const int n = grid.points_per_axis();
  std::vector<int> coords(grid.node_count() * static_cast<std::size_t>(d), 0);
  std::vector<int> odo(d, 0);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    for (int j = 0; j < d; ++j) coords[node * d + j] = odo[j];
    for (int j = d - 1; j >= 0; --j) {
      if (++odo[j] < n) break;
      odo[j] = 0;
    }
  }
  return coords;
}

}  // namespace

TorusGrid::TorusGrid(int dim, int points_per_axis)
    : dim_(dim), n_(points_per_axis) {
  if (dim < 1) throw DimensionError("TorusGrid: dimension must be >= 1");
  if (points_per_axis < 1)
    throw DomainError("TorusGrid: points per axis must be >= 1");
  node_count_ = 1;
  for (int j = 0; j < dim; ++j) {
    if (node_count_ > (std::size_t{1} << 40) / static_cast<std::size_t>(n_))
      throw DomainError("TorusGrid: node count too large");
    node_count_ *= static_cast<std::size_t>(n_);
  }
}

void TorusGrid::node_coords(std::size_t node, std::span<int> out) const {
  if (out.size() != static_cast<std::size_t>(dim_))
    throw DimensionError("node_coords: output span has wrong length");
  if (node >= node_count_) throw IndexError("node_coords: node out of range");
  for (int j = dim_ - 1; j >= 0; --j) {
    out[j] = static_cast<int>(node % static_cast<std::size_t>(n_));
    node /= static_cast<std::size_t>(n_);
  }
}

double TorusGrid::angle(int axis_coord) const {
  return 2.0 * std::numbers::pi * static_cast<double>(axis_coord) /
         static_cast<double>(n_);
}

std::vector<double> TorusGrid::node_angles(std::size_t node) const {
  std::vector<int> c(dim_);
  node_coords(node, c);
  std::vector<double> out(dim_);
  for (int j = 0; j < dim_; ++j) out[j] = angle(c[j]);
  return out;
}

double quadrature(const TorusGrid& grid, std::span<const double> field) {
  if (field.size() != grid.node_count())
    throw DimensionError("quadrature: one sample per node required");
  double total = 0.0;
  for (double v : field) total += v;
  // Dividing by the count (instead of multiplying by the weight) keeps the
  // mean of a constant field exact.
  return total / static_cast<double>(grid.node_count());
}

Cplx quadrature(const TorusGrid& grid, std::span<const Cplx> field) {
  if (field.size() != grid.node_count())
    throw DimensionError("quadrature: one sample per node required");
  Cplx total = 0.0;
  for (const Cplx& v : field) total += v;
  return total / static_cast<double>(grid.node_count());
}

HermField::HermField(TorusGrid g, int m_, std::vector<Mat> s)
    : grid(std::move(g)), m(m_), samples(std::move(s)) {
  if (m < 1) throw DimensionError("HermField: matrix dimension must be >= 1");
  if (samples.size() != grid.node_count())
    throw DimensionError("HermField: one sample per node required");
  for (Mat& a : samples) {
    if (a.rows() != m || a.cols() != m)
      throw DimensionError("HermField: sample has wrong shape");
    const double scale = 1.0 + a.cwiseAbs().maxCoeff();
    if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw SymmetryError("HermField: sample is not Hermitian");
    a = hermitize_exact(a);
  }
}

HermitianCoeffs::HermitianCoeffs(IndexSet lambda, std::vector<Mat> coeffs,
                                 double tol)
    : lambda_(std::move(lambda)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != lambda_.size())
    throw DimensionError("HermitianCoeffs: one coefficient per index required");
  m_ = static_cast<int>(coeffs_.front().rows());
  if (m_ < 1)
    throw DimensionError("HermitianCoeffs: matrix dimension must be >= 1");
  for (const Mat& a : coeffs_)
    if (a.rows() != m_ || a.cols() != m_)
      throw DimensionError("HermitianCoeffs: coefficient has wrong shape");

  const std::size_t z = lambda_.zero_position();
  {
    const double scale = 1.0 + coeffs_[z].cwiseAbs().maxCoeff();
    if ((coeffs_[z] - coeffs_[z].adjoint()).cwiseAbs().maxCoeff() > tol * scale)
      throw SymmetryError("HermitianCoeffs: zero coefficient not Hermitian");
  }
  for (std::size_t p : lambda_.half_positions()) {
    const std::size_t q = lambda_.negation_position(p);
    const double scale = 1.0 + coeffs_[p].cwiseAbs().maxCoeff();
    if ((coeffs_[p] - coeffs_[q].adjoint()).cwiseAbs().maxCoeff() > tol * scale)
      throw SymmetryError(
          "HermitianCoeffs: conjugate-symmetry violated between opposite "
          "indices");
  }

  // Re-mirror so the symmetry holds exactly from here on.
  coeffs_[z] = hermitize_exact(coeffs_[z]);
  for (std::size_t p : lambda_.half_positions()) {
    const std::size_t q = lambda_.negation_position(p);
    coeffs_[p] = 0.5 * (coeffs_[p] + coeffs_[q].adjoint());
    coeffs_[q] = coeffs_[p].adjoint();
  }
}

HermitianCoeffs HermitianCoeffs::zero(IndexSet lambda, int m) {
  std::vector<Mat> coeffs(lambda.size(), Mat::Zero(m, m));
  return HermitianCoeffs(std::move(lambda), std::move(coeffs));
}

HermitianCoeffs mirror_half_set(IndexSet lambda, int m, const Mat& zero_coeff,
                                std::span<const Mat> half_coeffs) {
  if (zero_coeff.rows() != m || zero_coeff.cols() != m)
    throw DimensionError("mirror_half_set: zero coefficient has wrong shape");
  const auto& half = lambda.half_positions();
  if (half_coeffs.size() != half.size())
    throw DimensionError(
        "mirror_half_set: one coefficient per half-set index required");

  HermitianCoeffs out;
  out.m_ = m;
  out.coeffs_.assign(lambda.size(), Mat());
  out.coeffs_[lambda.zero_position()] = 0.5 * (zero_coeff + zero_coeff.adjoint());
  for (std::size_t i = 0; i < half.size(); ++i) {
    const Mat& a = half_coeffs[i];
    if (a.rows() != m || a.cols() != m)
      throw DimensionError("mirror_half_set: coefficient has wrong shape");
    out.coeffs_[half[i]] = a;
    out.coeffs_[lambda.negation_position(half[i])] = a.adjoint();
  }
  out.lambda_ = std::move(lambda);
  return out;
}

PhaseTable::PhaseTable(const TorusGrid& grid, const IndexSet& lambda)
    : nodes_(grid.node_count()) {
  if (grid.dim() != lambda.dim())
    throw DimensionError("PhaseTable: grid and index set dimensions differ");
  table_.assign(lambda.size() * nodes_, Cplx(1.0, 0.0));

  const int d = grid.dim();
  const long long n = grid.points_per_axis();
  std::vector<Cplx> root(static_cast<std::size_t>(n));
  for (long long r = 0; r < n; ++r)
    root[static_cast<std::size_t>(r)] = std::polar(
        1.0, 2.0 * std::numbers::pi * static_cast<double>(r) /
                 static_cast<double>(n));

  const std::vector<int> coords = all_node_coords(grid);
  for (std::size_t p : lambda.half_positions()) {
    const MultiIndex& k = lambda[p];
    const std::size_t q = lambda.negation_position(p);
    for (std::size_t node = 0; node < nodes_; ++node) {
      long long dot = 0;
      for (int j = 0; j < d; ++j)
        dot += static_cast<long long>(k[j]) * coords[node * d + j];
      long long r = dot % n;
      if (r < 0) r += n;
      const Cplx phase = root[static_cast<std::size_t>(r)];
      table_[p * nodes_ + node] = phase;
      table_[q * nodes_ + node] = std::conj(phase);
    }
  }
}

HermField eval_trig_poly(const HermitianCoeffs& coeffs, const TorusGrid& grid) {
  const IndexSet& lambda = coeffs.index_set();
  if (grid.dim() != lambda.dim())
    throw DimensionError("eval_trig_poly: grid and index set dimensions differ");
  const int m = coeffs.m();
  const PhaseTable phases(grid, lambda);
  const auto& half = lambda.half_positions();
  const Mat& q0 = coeffs.at(lambda.zero_position());

  std::vector<Mat> samples(grid.node_count());
  Mat b(m, m);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    Mat s = q0;
    for (std::size_t p : half) {
      // Coefficient times e^{-i<k,theta>}; adding B + B^dagger keeps the
      // sample exactly Hermitian at every step.
      b.noalias() = coeffs.at(p) * std::conj(phases.at(p, node));
      s += b + b.adjoint();
    }
    samples[node] = std::move(s);
  }
  return HermField(grid, m, std::move(samples));
}

CovarianceData gamma_moments(const HermField& field, const IndexSet& lambda) {
  const TorusGrid& grid = field.grid;
  if (grid.dim() != lambda.dim())
    throw DimensionError("gamma_moments: grid and index set dimensions differ");
  const int m = field.m;
  const double count = static_cast<double>(grid.node_count());
  const PhaseTable phases(grid, lambda);

  Mat zero_acc = Mat::Zero(m, m);
  for (std::size_t node = 0; node < grid.node_count(); ++node)
    zero_acc += field.at(node);
  const Mat zero_coeff = zero_acc / count;

  const auto& half = lambda.half_positions();
  std::vector<Mat> half_coeffs(half.size());
  for (std::size_t i = 0; i < half.size(); ++i) {
    Mat acc = Mat::Zero(m, m);
    for (std::size_t node = 0; node < grid.node_count(); ++node)
      acc += phases.at(half[i], node) * field.at(node);
    half_coeffs[i] = acc / count;
  }
  return mirror_half_set(lambda, m, zero_coeff, half_coeffs);
}

}  // namespace m2spec
