#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "m2spec/dual_solver.hpp"
#include "m2spec/errors.hpp"
#include "m2spec/herm_linalg.hpp"
#include "m2spec/primal.hpp"
#include "test_support.hpp"

using namespace m2spec;
using testsup::identity_prior;
using testsup::random_coeffs;
using testsup::random_interior;

TEST_CASE("coordinate map is an isometry and round-trips") {
  std::mt19937_64 g(47);
  const IndexSet lambda = IndexSet::box(2, 1);
  const int m = 3;
  const HermitianCoeffs coeffs = random_coeffs(g, lambda, m);
  const DualVariable q{coeffs};

  CHECK(q.coord_dim() == 9 * 9);
  const RealVec x = q.coords();
  CHECK(static_cast<std::size_t>(x.size()) == q.coord_dim());

  // Norm preservation: coefficient norm equals coordinate norm.
  CHECK(q_norm(q) == doctest::Approx(x.norm()).epsilon(1e-12));

  // Round trip within one ulp per coordinate (the sqrt(2) scaling of the
  // orthonormal basis is not exactly invertible in floating point).
  const DualVariable back = DualVariable::from_coords(lambda, m, x);
  const RealVec x2 = back.coords();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    CHECK(x2[i] == doctest::Approx(x[i]).epsilon(1e-15));
  for (std::size_t p = 0; p < lambda.size(); ++p)
    CHECK((back.coeffs().at(p) - coeffs.at(p)).norm() <
          1e-15 * (1.0 + coeffs.at(p).norm()));

  // The zero-index diagonal block is mapped with unit scale, hence exactly.
  const std::size_t z = lambda.zero_position();
  CHECK(back.coeffs().at(z)(0, 0) == coeffs.at(z)(0, 0));

  const DualVariable zero(lambda, m);
  CHECK(q_norm(zero) == 0.0);
  CHECK(zero.coords().norm() == 0.0);

  // q_norm examples: Q_0 = I (m=2) has norm sqrt(2).
  std::vector<Mat> id0(lambda.size(), Mat::Zero(2, 2));
  id0[z] = Mat::Identity(2, 2);
  CHECK(q_norm(DualVariable{HermitianCoeffs(lambda, id0)}) ==
        doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("interior-guarantee order grows with m*d") {
  CHECK(choose_nu(2, 2) == 3);
  CHECK(choose_nu(1, 1) == 2);
  CHECK(choose_nu(3, 3) == 6);
  CHECK(choose_nu(1, 2) == 2);
  CHECK(choose_nu(2, 3) == 4);
  CHECK_THROWS_AS(choose_nu(0, 1), DimensionError);
}

TEST_CASE("feasibility margin tracks the constraint field spectrum") {
  const TorusGrid grid(1, 8);
  std::mt19937_64 g(53);

  // Q = 0: margin is the smallest eigenvalue of Psi^{-1}.
  {
    std::vector<Mat> samples(8, 2.0 * Mat::Identity(2, 2));
    const GridDensity psi{HermField(grid, 2, samples)};
    const DualVariable q0(IndexSet::box(1, 1), 2);
    CHECK(feasibility_margin(q0, psi, 2) == doctest::Approx(0.5).epsilon(1e-12));
  }

  // Constructed boundary violation: Q_0 = -2 nu on Psi = I drives
  // Psi^{-1} + Q/nu to -1 < 0.
  {
    const GridDensity psi = identity_prior(grid, 1);
    const IndexSet lambda = IndexSet::box(1, 1);
    std::vector<Mat> coeffs(3, Mat::Zero(1, 1));
    coeffs[lambda.zero_position()](0, 0) = -2.0 * 2.0;
    const DualVariable q{HermitianCoeffs(lambda, coeffs)};
    CHECK(feasibility_margin(q, psi, 2) == doctest::Approx(-1.0));
  }

  // Random interior variable: margin equals a per-node eigen oracle.
  {
    const GridDensity psi = identity_prior(grid, 2);
    const IndexSet lambda = IndexSet::box(1, 1);
    const DualVariable q = random_interior(g, lambda, 2, psi, 3);
    const HermField qf = eval_trig_poly(q.coeffs(), grid);
    double oracle = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < grid.node_count(); ++n) {
      const Mat r = Mat::Identity(2, 2) + qf.at(n) / 3.0;
      oracle = std::min(oracle, herm_eig(r).eigenvalues[0]);
    }
    CHECK(feasibility_margin(q, psi, 3) ==
          doctest::Approx(oracle).epsilon(1e-12));
    CHECK(feasibility_margin(q, psi, 3) > 0.0);
  }
}

TEST_CASE("dual objective closed forms") {
  const TorusGrid grid(1, 8);
  const IndexSet lambda = IndexSet::box(1, 1);
  const GridDensity psi = identity_prior(grid, 1);

  // Sigma with only a zero-lag moment.
  const double sigma0 = 0.7;
  std::vector<Mat> sc(3, Mat::Zero(1, 1));
  sc[lambda.zero_position()](0, 0) = sigma0;
  const CovarianceData sigma(lambda, sc);

  // At Q = 0 the integral term collapses to m*nu/(nu-1).
  for (int nu : {2, 3, 5}) {
    const DualVariable q0(lambda, 1);
    const double expected = static_cast<double>(nu) / (nu - 1.0);
    CHECK(dual_objective(q0, sigma, psi, nu) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(dual_objective_is(DualVariable(lambda, 1), sigma, psi) ==
        doctest::Approx(0.0));

  // Constant scalar Q: J = q0 sigma + 2/(1 + q0/2) for nu = 2, and the
  // log form for nu = 1.
  for (double q0v : {-1.5, -0.3, 0.4, 2.0}) {
    std::vector<Mat> qc(3, Mat::Zero(1, 1));
    qc[lambda.zero_position()](0, 0) = q0v;
    const DualVariable q{HermitianCoeffs(lambda, qc)};
    CHECK(dual_objective(q, sigma, psi, 2) ==
          doctest::Approx(q0v * sigma0 + 2.0 / (1.0 + q0v / 2.0))
              .epsilon(1e-12));
    if (q0v > -1.0)
      CHECK(dual_objective_is(q, sigma, psi) ==
            doctest::Approx(q0v * sigma0 - std::log(1.0 + q0v)).epsilon(1e-12));
  }

  // Outside the feasible set the objective refuses to evaluate.
  std::vector<Mat> qbad(3, Mat::Zero(1, 1));
  qbad[lambda.zero_position()](0, 0) = -2.5;
  const DualVariable qb{HermitianCoeffs(lambda, qbad)};
  CHECK_THROWS_AS(dual_objective(qb, sigma, psi, 2), BoundaryError);
  CHECK_THROWS_AS(dual_objective_is(qb, sigma, psi), BoundaryError);
}

TEST_CASE("pairing against moments equals the integral of trace(Q Phi)") {
  std::mt19937_64 g(59);
  const TorusGrid grid(2, 8);
  const IndexSet lambda = IndexSet::box(2, 1);
  const GridDensity phi = random_coercive_density(5, grid, 2, 0.5, 2.0);
  const CovarianceData sigma = gamma_moments(phi.field(), lambda);
  const DualVariable q{random_coeffs(g, lambda, 2)};

  const HermField qf = eval_trig_poly(q.coeffs(), grid);
  std::vector<double> traces(grid.node_count());
  for (std::size_t n = 0; n < grid.node_count(); ++n)
    traces[n] = (qf.at(n) * phi.at(n)).trace().real();
  CHECK(pairing(q.coeffs(), sigma) ==
        doctest::Approx(quadrature(grid, traces)).epsilon(1e-10));
}

TEST_CASE("objective dominates the pairing term on feasible variables") {
  std::mt19937_64 g(61);
  const TorusGrid grid(1, 8);
  const IndexSet lambda = IndexSet::box(1, 1);
  const GridDensity psi = identity_prior(grid, 2);
  const GridDensity gen = random_coercive_density(9, grid, 2, 0.4, 1.5);
  const CovarianceData sigma = gamma_moments(gen.field(), lambda);

  // alpha = -nu * integral trace(Psi^{-1} Phi_gen): the uniform lower bound
  // on the pairing over the feasible set.
  const int nu = 2;
  std::vector<double> tr(grid.node_count());
  for (std::size_t n = 0; n < grid.node_count(); ++n)
    tr[n] = gen.at(n).trace().real();  // Psi = I
  const double alpha = -nu * quadrature(grid, tr);

  for (int trial = 0; trial < 20; ++trial) {
    const DualVariable q =
        random_interior(g, lambda, 2, psi, nu, 0.2 + 0.7 * testsup::urand(g));
    const double j = dual_objective(q, sigma, psi, nu);
    const double lin = pairing(q.coeffs(), sigma);
    CHECK(j >= lin - 1e-10);
    CHECK(lin >= alpha - 1e-10);
  }
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 g(67);
  struct Setup {
    int d, m, nu;
  };
  for (const Setup s : {Setup{1, 1, 2}, Setup{2, 2, 3}, Setup{1, 2, 2}}) {
    const TorusGrid grid(s.d, 8);
    const IndexSet lambda = IndexSet::box(s.d, 1);
    const GridDensity psi = identity_prior(grid, s.m);
    const GridDensity gen =
        random_coercive_density(70 + s.d + s.m, grid, s.m, 0.5, 2.0);
    const CovarianceData sigma = gamma_moments(gen.field(), lambda);

    const auto j = [&](const RealVec& x) {
      return dual_objective(DualVariable::from_coords(lambda, s.m, x), sigma,
                            psi, s.nu);
    };
    for (int trial = 0; trial < 5; ++trial) {
      const DualVariable q = random_interior(g, lambda, s.m, psi, s.nu);
      const RealVec ga =
          coeffs_to_coords(dual_gradient(q, sigma, psi, s.nu));
      const RealVec gf = testsup::fd_gradient(j, q.coords(), 1e-5);
      CHECK((ga - gf).norm() / std::max(1e-8, ga.norm()) < 1e-5);
    }
  }

  // The log-determinant path (nu = 1).
  {
    const TorusGrid grid(1, 8);
    const IndexSet lambda = IndexSet::box(1, 1);
    const GridDensity psi = identity_prior(grid, 2);
    const GridDensity gen = random_coercive_density(83, grid, 2, 0.5, 2.0);
    const CovarianceData sigma = gamma_moments(gen.field(), lambda);
    const auto j = [&](const RealVec& x) {
      return dual_objective_is(DualVariable::from_coords(lambda, 2, x), sigma,
                               psi);
    };
    for (int trial = 0; trial < 5; ++trial) {
      const DualVariable q = random_interior(g, lambda, 2, psi, 1);
      const RealVec ga = coeffs_to_coords(dual_gradient(q, sigma, psi, 1));
      const RealVec gf = testsup::fd_gradient(j, q.coords(), 1e-5);
      CHECK((ga - gf).norm() / std::max(1e-8, ga.norm()) < 1e-5);
    }
  }
}

TEST_CASE("gradient vanishes at the prior self-match") {
  const TorusGrid grid(2, 8);
  const IndexSet lambda = IndexSet::box(2, 1);
  const GridDensity psi = identity_prior(grid, 2);
  const CovarianceData sigma = gamma_moments(psi.field(), lambda);
  const DualVariable q0(lambda, 2);
  const RealVec ga = coeffs_to_coords(dual_gradient(q0, sigma, psi, 3));
  CHECK(ga.norm() < 1e-12);
}

TEST_CASE("dual is midpoint-convex on the interior") {
  std::mt19937_64 g(71);
  const TorusGrid grid(1, 8);
  const IndexSet lambda = IndexSet::box(1, 1);
  const GridDensity psi = identity_prior(grid, 2);
  const GridDensity gen = random_coercive_density(29, grid, 2, 0.5, 2.0);
  const CovarianceData sigma = gamma_moments(gen.field(), lambda);

  for (int nu : {1, 2, 3}) {
    const auto j = [&](const DualVariable& q) {
      return nu == 1 ? dual_objective_is(q, sigma, psi)
                     : dual_objective(q, sigma, psi, nu);
    };
    for (int trial = 0; trial < 10; ++trial) {
      const DualVariable a = random_interior(g, lambda, 2, psi, nu);
      const DualVariable b = random_interior(g, lambda, 2, psi, nu);
      const RealVec xm = 0.5 * (a.coords() + b.coords());
      const DualVariable mid = DualVariable::from_coords(lambda, 2, xm);
      CHECK(j(mid) <= 0.5 * (j(a) + j(b)) + 1e-9);
    }
  }
}

TEST_CASE("solver handles the prior self-match instantly") {
  const TorusGrid grid(2, 8);
  const IndexSet lambda = IndexSet::box(2, 1);
  const GridDensity psi = identity_prior(grid, 2);
  const CovarianceData sigma = gamma_moments(psi.field(), lambda);

  const SolverReport report = solve_dual(sigma, psi, 3);
  CHECK(report.status == SolverStatus::converged_interior);
  CHECK(q_norm(report.q) <= 1e-6);
  CHECK(report.grad_norm <= 1e-8);
  CHECK(report.feasibility_margin > 0.0);
}

TEST_CASE("solver recovers moments of feasible instances") {
  const TorusGrid grid(2, 8);
  const IndexSet lambda = IndexSet::box(2, 1);
  const GridDensity psi = identity_prior(grid, 2);
  const GridDensity gen = random_coercive_density(31, grid, 2, 0.5, 2.0);
  const CovarianceData sigma = gamma_moments(gen.field(), lambda);

  SolverOptions opts;
  opts.max_iters = 2000;
  const SolverReport report = solve_dual(sigma, psi, 3, opts);
  CHECK(report.status == SolverStatus::converged_interior);

  const GridDensity phi = primal_density(report.q, psi, 3);
  CHECK(moment_residual(phi, sigma).max <= 1e-6);

  // Watchdog descent: each accepted iterate improves on the worst of the
  // previous ten, and the run ends below its start.
  for (std::size_t i = 1; i < report.history.size(); ++i) {
    double ref = -std::numeric_limits<double>::infinity();
    for (std::size_t j = i >= 10 ? i - 10 : 0; j < i; ++j)
      ref = std::max(ref, report.history[j].objective);
    CHECK(report.history[i].objective <= ref + 1e-12);
  }
  CHECK(report.history.back().objective <=
        report.history.front().objective + 1e-12);

  // Scaling consistency: a scaled covariance re-solves to scaled moments.
  std::vector<Mat> scaled_half;
  const auto& half = lambda.half_positions();
  for (std::size_t h = 0; h < half.size(); ++h)
    scaled_half.push_back(10.0 * sigma.at(half[h]));
  const CovarianceData sigma10 = mirror_half_set(
      lambda, 2, 10.0 * sigma.at(lambda.zero_position()), scaled_half);
  const SolverReport report10 = solve_dual(sigma10, psi, 3, opts);
  CHECK(report10.status == SolverStatus::converged_interior);
  const GridDensity phi10 = primal_density(report10.q, psi, 3);
  CHECK(moment_residual(phi10, sigma10).max <= 1e-5);
}

TEST_CASE("solver termination knobs") {
  const TorusGrid grid(1, 8);
  const IndexSet lambda = IndexSet::box(1, 1);
  const GridDensity psi = identity_prior(grid, 1);
  const GridDensity gen = random_coercive_density(37, grid, 1, 0.5, 2.0);
  const CovarianceData sigma = gamma_moments(gen.field(), lambda);

  SolverOptions capped;
  capped.max_iters = 1;
  const SolverReport r1 = solve_dual(sigma, psi, 2, capped);
  CHECK(r1.status == SolverStatus::max_iters);
  CHECK(r1.iterations == 1);

  SolverOptions tiny_cap;
  tiny_cap.norm_cap = 1e-12;
  const SolverReport r2 = solve_dual(sigma, psi, 2, tiny_cap);
  CHECK(r2.status == SolverStatus::norm_cap_hit);

  SolverOptions bad;
  bad.backtrack_ratio = 1.5;
  CHECK_THROWS_AS(solve_dual(sigma, psi, 2, bad), DomainError);

  // The Itakura-Saito path solves feasible scalar problems too.
  SolverOptions opts;
  opts.max_iters = 2000;
  const SolverReport r3 = solve_dual(sigma, psi, 1, opts);
  CHECK(r3.status == SolverStatus::converged_interior);
  const GridDensity phi1 = primal_density(r3.q, psi, 1);
  CHECK(moment_residual(phi1, sigma).max <= 1e-6);
}
