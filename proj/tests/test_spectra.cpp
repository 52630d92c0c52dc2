#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "m2spec/errors.hpp"
#include "m2spec/herm_linalg.hpp"
#include "m2spec/spectra.hpp"
#include "test_support.hpp"

using namespace m2spec;

TEST_CASE("priors evaluate to coercive densities") {
  const TorusGrid grid(1, 8);

  // Constant identity.
  const GridDensity ident = eval_prior(ConstantPrior{Mat::Identity(2, 2)}, grid);
  CHECK(ident.lower_bound() == doctest::Approx(1.0));
  CHECK(ident.upper_bound() == doctest::Approx(1.0));
  CHECK(ident.coercive());

  // Scalar inverse polynomial 1/(2 + cos).
  const IndexSet lambda = IndexSet::box(1, 1);
  std::vector<Mat> pc(3, Mat::Zero(1, 1));
  pc[lambda.zero_position()](0, 0) = 2.0;
  pc[lambda.position(MultiIndex{1})](0, 0) = 0.5;
  pc[lambda.position(MultiIndex{-1})](0, 0) = 0.5;
  const GridDensity psi =
      eval_prior(InversePolyPrior{HermitianCoeffs(lambda, pc)}, grid);
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const double expected =
        1.0 / (2.0 + std::cos(grid.angle(static_cast<int>(n))));
    CHECK(psi.at(n)(0, 0).real() == doctest::Approx(expected).epsilon(1e-12));
  }

  // Matrix polynomial: product with its inverse is the identity per node.
  std::mt19937_64 g(19);
  const TorusGrid grid2(2, 6);
  const IndexSet lambda2 = IndexSet::box(2, 1);
  const HermitianCoeffs poly = testsup::random_positive_poly(g, lambda2, 2);
  const GridDensity psi2 = eval_prior(InversePolyPrior{poly}, grid2);
  const HermField pfield = eval_trig_poly(poly, grid2);
  for (std::size_t n = 0; n < grid2.node_count(); ++n)
    CHECK((psi2.at(n) * pfield.at(n) - Mat::Identity(2, 2)).norm() < 1e-10);

  // Indefinite polynomial is rejected.
  std::vector<Mat> bad(3, Mat::Zero(1, 1));
  bad[lambda.zero_position()](0, 0) = 0.5;
  bad[lambda.position(MultiIndex{1})](0, 0) = 1.0;
  bad[lambda.position(MultiIndex{-1})](0, 0) = 1.0;
  CHECK_THROWS_AS(
      eval_prior(InversePolyPrior{HermitianCoeffs(lambda, bad)}, grid),
      PriorInvalidError);

  // Non-coercive explicit density is rejected as a prior.
  std::vector<Mat> dip(grid.node_count(), Mat::Identity(1, 1));
  dip[0](0, 0) = 0.0;
  CHECK_THROWS_AS(
      eval_prior(GridPrior{GridDensity(HermField(grid, 1, dip))}, grid),
      PriorInvalidError);
}

TEST_CASE("random coercive densities respect their bounds") {
  const TorusGrid grid(2, 8);

  // Degenerate band a = b collapses to a scaled identity.
  const GridDensity flat = random_coercive_density(1, grid, 2, 1.5, 1.5);
  for (std::size_t n = 0; n < grid.node_count(); ++n)
    CHECK((flat.at(n) - 1.5 * Mat::Identity(2, 2)).norm() == 0.0);

  // Determinism: same seed, same field.
  const GridDensity d1 = random_coercive_density(42, grid, 2, 0.5, 2.0);
  const GridDensity d2 = random_coercive_density(42, grid, 2, 0.5, 2.0);
  for (std::size_t n = 0; n < grid.node_count(); ++n)
    CHECK((d1.at(n) - d2.at(n)).norm() == 0.0);
  const GridDensity d3 = random_coercive_density(43, grid, 2, 0.5, 2.0);
  CHECK((d1.at(0) - d3.at(0)).norm() > 0.0);

  // Eigenvalue scan over many seeds stays inside [a, b].
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GridDensity d = random_coercive_density(seed, grid, 2, 0.5, 2.0);
    const EigRange range = eig_range(d.field());
    CHECK(range.min >= 0.5 - 1e-12);
    CHECK(range.max <= 2.0 + 1e-9);
    CHECK(d.coercive());
  }

  CHECK_THROWS_AS(random_coercive_density(1, grid, 2, -1.0, 2.0), DomainError);
  CHECK_THROWS_AS(random_coercive_density(1, grid, 2, 2.0, 1.0), DomainError);
}

TEST_CASE("synthetic fields have the prescribed second moments") {
  // White density: lag-0 sample covariance near the identity.
  {
    const TorusGrid grid(2, 8);
    const GridDensity white = testsup::identity_prior(grid, 2);
    Mat cov = Mat::Zero(2, 2);
    const int reals = 40;
    for (int r = 0; r < reals; ++r) {
      const FieldRealization y = synth_field(white, 100 + r);
      Mat acc = Mat::Zero(2, 2);
      for (const Vec& v : y) acc += v * v.adjoint();
      cov += acc / static_cast<double>(y.size());
    }
    cov /= static_cast<double>(reals);
    const double tol = 3.0 / std::sqrt(static_cast<double>(grid.node_count()));
    CHECK((cov - Mat::Identity(2, 2)).norm() < tol);
  }

  // Zero density gives the zero field.
  {
    const TorusGrid grid(1, 8);
    std::vector<Mat> zeros(8, Mat::Zero(1, 1));
    const GridDensity none(HermField(grid, 1, zeros));
    const FieldRealization y = synth_field(none, 7);
    for (const Vec& v : y) CHECK(std::abs(v[0]) == 0.0);
  }

  // Scalar density 1 + 0.5 cos: lag-1 sample covariance near 1/4.
  {
    const TorusGrid grid(1, 16);
    std::vector<Mat> samples(16, Mat::Zero(1, 1));
    for (std::size_t n = 0; n < 16; ++n)
      samples[n](0, 0) =
          1.0 + 0.5 * std::cos(grid.angle(static_cast<int>(n)));
    const GridDensity phi(HermField(grid, 1, samples));
    Cplx lag1 = 0.0;
    const int reals = 400;
    for (int r = 0; r < reals; ++r) {
      const FieldRealization y = synth_field(phi, 5000 + r);
      Cplx acc = 0.0;
      for (std::size_t t = 0; t < 16; ++t)
        acc += y[(t + 1) % 16][0] * std::conj(y[t][0]);
      lag1 += acc / 16.0;
    }
    lag1 /= static_cast<double>(reals);
    CHECK(std::abs(lag1 - Cplx(0.25, 0.0)) < 0.05);
  }
}

TEST_CASE("periodogram averaging is feasible by construction") {
  const TorusGrid grid(1, 8);
  const IndexSet lambda = IndexSet::box(1, 1);

  // One constant realization: a rank-one PSD periodogram with PSD Sigma_0.
  {
    FieldRealization y(8, Vec::Ones(2));
    std::vector<FieldRealization> reals{y};
    const GridDensity p = averaged_periodogram(reals, grid, 2);
    CHECK(p.lower_bound() >= -1e-10);
    const CovarianceData sigma = smoothed_periodogram(reals, grid, 2, lambda);
    const Mat s0 = sigma.at(lambda.zero_position());
    CHECK(herm_eig(s0).eigenvalues[0] >= -1e-12);
    // Conjugate symmetry is exact.
    for (std::size_t p2 : lambda.half_positions())
      CHECK((sigma.at(lambda.negation_position(p2)) - sigma.at(p2).adjoint())
                .norm() == 0.0);
  }

  // Averaging converges to the moments of the true density.
  {
    std::mt19937_64 g(23);
    const GridDensity truth = random_coercive_density(3, grid, 2, 0.5, 2.0);
    std::vector<FieldRealization> reals;
    for (int r = 0; r < 500; ++r)
      reals.push_back(synth_field(truth, 900 + r));
    const CovarianceData sigma = smoothed_periodogram(reals, grid, 2, lambda);
    const CovarianceData direct = gamma_moments(truth.field(), lambda);
    for (std::size_t p = 0; p < lambda.size(); ++p) {
      const double denom = 1.0 + direct.at(p).norm();
      CHECK((sigma.at(p) - direct.at(p)).norm() / denom < 0.05);
    }
  }

  std::vector<FieldRealization> empty;
  CHECK_THROWS_AS(averaged_periodogram(empty, grid, 2), DataError);
}
