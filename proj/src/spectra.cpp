#include "m2spec/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include "m2spec/errors.hpp"
#include "m2spec/herm_linalg.hpp"

namespace m2spec {

namespace {

// Gaussian draws with a pinned algorithm (Box-Muller over mt19937_64) so
// fixed seeds give identical fields on every platform; the distributions in
// <random> do not promise a reproducible sequence.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : gen_(seed) {}

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // in (0, 1], keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Standard complex normal: unit second moment E[z conj(z)] = 1.
  Cplx cnormal() {
    const double re = normal();
    const double im = normal();
    return Cplx(re, im) / std::numbers::sqrt2;
  }

 private:
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// exp(2*pi*i*r/n) for r = 0..n-1.
std::vector<Cplx> unit_roots(int n) {
  std::vector<Cplx> root(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r)
    root[static_cast<std::size_t>(r)] = std::polar(
        1.0, 2.0 * std::numbers::pi * static_cast<double>(r) /
                 static_cast<double>(n));
  return root;
}

std::vector<int> lattice_coords(const TorusGrid& grid) {
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

GridDensity::GridDensity(HermField field) : field_(std::move(field)) {
  const EigRange range = eig_range(field_);
  if (range.min < -kEigClip)
    throw DomainError("GridDensity: field is not positive semidefinite");
  min_eig_ = range.min;
  max_eig_ = range.max;
}

GridDensity eval_prior(const PriorSpec& spec, const TorusGrid& grid) {
  if (const auto* constant = std::get_if<ConstantPrior>(&spec)) {
    const Mat h = hermitized(constant->value, "constant prior");
    Eigen::SelfAdjointEigenSolver<Mat> solver(h);
    if (solver.eigenvalues()[0] <= 0.0)
      throw PriorInvalidError("prior: constant matrix is not positive definite");
    std::vector<Mat> samples(grid.node_count(), h);
    return GridDensity(
        HermField(grid, static_cast<int>(h.rows()), std::move(samples)));
  }

  if (const auto* ip = std::get_if<InversePolyPrior>(&spec)) {
    const HermField p = eval_trig_poly(ip->poly, grid);
    std::vector<Mat> samples(grid.node_count());
    Eigen::SelfAdjointEigenSolver<Mat> solver;
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
      solver.compute(p.at(node));
      if (solver.info() != Eigen::Success)
        throw Error("prior: eigendecomposition failed");
      if (solver.eigenvalues()[0] <= 0.0)
        throw PriorInvalidError(
            "prior: polynomial is not strictly positive on the grid");
      const Mat inv = solver.eigenvectors() *
                      solver.eigenvalues().cwiseInverse().asDiagonal() *
                      solver.eigenvectors().adjoint();
      samples[node] = 0.5 * (inv + inv.adjoint());
    }
    return GridDensity(HermField(grid, p.m, std::move(samples)));
  }

  const auto& gp = std::get<GridPrior>(spec);
  if (!(gp.density.grid() == grid))
    throw DimensionError("prior: density lives on a different grid");
  if (!gp.density.coercive())
    throw PriorInvalidError("prior: grid density is not coercive");
  return gp.density;
}

GridDensity random_coercive_density(std::uint64_t seed, const TorusGrid& grid,
                                    int m, double a, double b) {
  if (m < 1) throw DimensionError("random_coercive_density: m must be >= 1");
  if (!(a > 0.0) || !(b >= a))
    throw DomainError("random_coercive_density: need 0 < a <= b");

  GaussianSampler rng(seed);
  const IndexSet band = IndexSet::box(grid.dim(), 1);
  std::vector<Mat> coeffs(band.size());
  for (std::size_t p = 0; p < band.size(); ++p) {
    Mat c(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) c(i, j) = rng.cnormal();
    coeffs[p] = std::move(c);
  }

  // T(theta) = sum_k C_k e^{-i<k,theta>} with free (non-symmetric)
  // coefficients; T T^dagger is then a PSD Hermitian trigonometric
  // polynomial of per-axis degree <= 2.
  const PhaseTable phases(grid, band);
  std::vector<Mat> outer(grid.node_count());
  Mat t(m, m);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    t.setZero();
    for (std::size_t p = 0; p < band.size(); ++p)
      t.noalias() += coeffs[p] * std::conj(phases.at(p, node));
    outer[node] = t * t.adjoint();
  }

  double lam_max = 0.0;
  {
    Eigen::SelfAdjointEigenSolver<Mat> solver;
    for (const Mat& o : outer) {
      solver.compute(o, Eigen::EigenvaluesOnly);
      lam_max = std::max(lam_max, solver.eigenvalues()[m - 1]);
    }
  }

  const double scale = (b > a && lam_max > 0.0) ? (b - a) / lam_max : 0.0;
  const Mat shift = a * Mat::Identity(m, m);
  for (Mat& o : outer) o = shift + scale * o;
  return GridDensity(HermField(grid, m, std::move(outer)));
}

FieldRealization synth_field(const GridDensity& phi, std::uint64_t seed) {
  const TorusGrid& grid = phi.grid();
  const int m = phi.m();
  const int d = grid.dim();
  const int n = grid.points_per_axis();
  const std::size_t nodes = grid.node_count();

  GaussianSampler rng(seed);
  std::vector<Vec> colored(nodes);
  for (std::size_t node = 0; node < nodes; ++node) {
    Vec xi(m);
    for (int i = 0; i < m; ++i) xi[i] = rng.cnormal();
    colored[node] = matrix_power(phi.at(node), 0.5) * xi;
  }

  // y_t = N^{-d/2} sum_n e^{+i<t,theta_n>} W_n xi_n; the normalization makes
  // the periodogram of y an unbiased per-node estimate of Phi.
  const std::vector<Cplx> root = unit_roots(n);
  const std::vector<int> coords = lattice_coords(grid);
  const double norm = std::pow(static_cast<double>(nodes), -0.5);
  FieldRealization y(nodes, Vec::Zero(m));
  for (std::size_t t = 0; t < nodes; ++t) {
    Vec acc = Vec::Zero(m);
    for (std::size_t node = 0; node < nodes; ++node) {
      long long dot = 0;
      for (int j = 0; j < d; ++j)
        dot += static_cast<long long>(coords[t * d + j]) *
               coords[node * d + j];
      acc += root[static_cast<std::size_t>(dot % n)] * colored[node];
    }
    y[t] = norm * acc;
  }
  return y;
}

GridDensity averaged_periodogram(std::span<const FieldRealization> realizations,
                                 const TorusGrid& grid, int m) {
  if (realizations.empty())
    throw DataError("averaged_periodogram: at least one realization required");
  const int d = grid.dim();
  const int n = grid.points_per_axis();
  const std::size_t nodes = grid.node_count();
  for (const FieldRealization& y : realizations) {
    if (y.size() != nodes)
      throw DimensionError("averaged_periodogram: realization size mismatch");
    for (const Vec& v : y)
      if (v.size() != m)
        throw DimensionError("averaged_periodogram: vector length mismatch");
  }

  const std::vector<Cplx> root = unit_roots(n);
  const std::vector<int> coords = lattice_coords(grid);
  std::vector<Mat> acc(nodes, Mat::Zero(m, m));
  Vec hat(m);
  for (const FieldRealization& y : realizations) {
    for (std::size_t node = 0; node < nodes; ++node) {
      hat.setZero();
      for (std::size_t t = 0; t < nodes; ++t) {
        long long dot = 0;
        for (int j = 0; j < d; ++j)
          dot += static_cast<long long>(coords[t * d + j]) *
                 coords[node * d + j];
        // e^{-i<t,theta_node>} = conj(root[dot mod n])
        hat += std::conj(root[static_cast<std::size_t>(dot % n)]) * y[t];
      }
      acc[node] += hat * hat.adjoint();
    }
  }
  const double scale =
      1.0 / (static_cast<double>(nodes) * static_cast<double>(realizations.size()));
  for (Mat& a : acc) a *= scale;
  return GridDensity(HermField(grid, m, std::move(acc)));
}

CovarianceData smoothed_periodogram(std::span<const FieldRealization> realizations,
                                    const TorusGrid& grid, int m,
                                    const IndexSet& lambda) {
  const GridDensity p = averaged_periodogram(realizations, grid, m);
  return gamma_moments(p.field(), lambda);
}

}  // namespace m2spec
