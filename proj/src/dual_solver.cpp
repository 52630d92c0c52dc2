#include "m2spec/dual_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "m2spec/errors.hpp"
#include "m2spec/herm_linalg.hpp"
#include "m2spec/primal.hpp"

namespace m2spec {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

void check_problem(const IndexSet& lambda, int m, const CovarianceData& sigma,
                   const GridDensity& psi) {
  if (!(sigma.index_set() == lambda))
    throw IndexError("dual problem: covariance and variable index sets differ");
  if (sigma.m() != m || psi.m() != m)
    throw DimensionError("dual problem: matrix dimensions disagree");
  if (psi.grid().dim() != lambda.dim())
    throw DimensionError("dual problem: grid and index set dimensions differ");
  if (!psi.coercive())
    throw PriorInvalidError("dual problem: prior is not coercive");
}

// Per-node inverse of a coercive density, exactly Hermitian samples.
std::vector<Mat> inverse_field(const GridDensity& psi) {
  const int m = psi.m();
  const Mat eye = Mat::Identity(m, m);
  std::vector<Mat> inv(psi.node_count());
  for (std::size_t node = 0; node < psi.node_count(); ++node) {
    const Mat x = Eigen::LLT<Mat>(psi.at(node)).solve(eye);
    inv[node] = 0.5 * (x + x.adjoint());
  }
  return inv;
}

}  // namespace

DualVariable::DualVariable(IndexSet lambda, int m)
    : coeffs_(HermitianCoeffs::zero(std::move(lambda), m)) {}

DualVariable::DualVariable(HermitianCoeffs coeffs)
    : coeffs_(std::move(coeffs)) {}

RealVec coeffs_to_coords(const HermitianCoeffs& coeffs) {
  const IndexSet& lambda = coeffs.index_set();
  const int m = coeffs.m();
  RealVec x(static_cast<Eigen::Index>(lambda.size()) * m * m);
  Eigen::Index pos = 0;

  const Mat& q0 = coeffs.at(lambda.zero_position());
  for (int i = 0; i < m; ++i) x[pos++] = q0(i, i).real();
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      x[pos++] = kSqrt2 * q0(i, j).real();
      x[pos++] = kSqrt2 * q0(i, j).imag();
    }

  for (std::size_t p : lambda.half_positions()) {
    const Mat& qk = coeffs.at(p);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        x[pos++] = kSqrt2 * qk(i, j).real();
        x[pos++] = kSqrt2 * qk(i, j).imag();
      }
  }
  return x;
}

HermitianCoeffs coords_to_coeffs(const IndexSet& lambda, int m,
                                 const RealVec& x) {
  const Eigen::Index want =
      static_cast<Eigen::Index>(lambda.size()) * m * m;
  if (x.size() != want)
    throw DimensionError("coords_to_coeffs: coordinate vector has wrong length");
  Eigen::Index pos = 0;

  Mat q0 = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i) q0(i, i) = x[pos++];
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const double re = x[pos++] / kSqrt2;
      const double im = x[pos++] / kSqrt2;
      q0(i, j) = Cplx(re, im);
      q0(j, i) = Cplx(re, -im);
    }

  const auto& half = lambda.half_positions();
  std::vector<Mat> half_coeffs(half.size());
  for (std::size_t h = 0; h < half.size(); ++h) {
    Mat qk(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const double re = x[pos++] / kSqrt2;
        const double im = x[pos++] / kSqrt2;
        qk(i, j) = Cplx(re, im);
      }
    half_coeffs[h] = std::move(qk);
  }
  return mirror_half_set(lambda, m, q0, half_coeffs);
}

DualVariable DualVariable::from_coords(const IndexSet& lambda, int m,
                                       const RealVec& x) {
  return DualVariable(coords_to_coeffs(lambda, m, x));
}

RealVec DualVariable::coords() const { return coeffs_to_coords(coeffs_); }

double q_norm(const DualVariable& q) {
  double total = 0.0;
  for (const Mat& c : q.coeffs().coeffs()) total += c.squaredNorm();
  return std::sqrt(total);
}

int choose_nu(int m, int d) {
  if (m < 1 || d < 1) throw DimensionError("choose_nu: m and d must be >= 1");
  return std::max(2, (m * d + 3) / 2);
}

HermField constraint_field(const DualVariable& q, const GridDensity& psi,
                           int nu) {
  if (nu < 1) throw DomainError("constraint_field: nu must be >= 1");
  if (q.m() != psi.m())
    throw DimensionError("constraint_field: matrix dimensions disagree");
  if (!psi.coercive())
    throw PriorInvalidError("constraint_field: prior is not coercive");

  const HermField qf = eval_trig_poly(q.coeffs(), psi.grid());
  std::vector<Mat> inv = inverse_field(psi);
  const double inv_nu = 1.0 / static_cast<double>(nu);
  for (std::size_t node = 0; node < inv.size(); ++node)
    inv[node] += inv_nu * qf.at(node);
  return HermField(psi.grid(), psi.m(), std::move(inv));
}

double feasibility_margin(const DualVariable& q, const GridDensity& psi,
                          int nu) {
  return min_eig_field(constraint_field(q, psi, nu));
}

namespace {

// Shared body of the two dual objectives: builds the constraint field,
// enforces interiority, integrates the barrier-like term.
double objective_impl(const DualVariable& q, const CovarianceData& sigma,
                      const GridDensity& psi, int nu) {
  check_problem(q.index_set(), q.m(), sigma, psi);
  const HermField constraint = constraint_field(q, psi, nu);
  if (min_eig_field(constraint) <= 0.0)
    throw BoundaryError("dual objective: variable is outside the feasible set");

  const int m = psi.m();
  const Mat eye = Mat::Identity(m, m);
  std::vector<double> integrand(psi.node_count());

  if (nu == 1) {
    for (std::size_t node = 0; node < psi.node_count(); ++node) {
      const Eigen::LLT<Mat> llt(constraint.at(node));
      // log det from the Cholesky factor: 2 * sum log diag(L).
      double half_logdet = 0.0;
      for (int i = 0; i < m; ++i)
        half_logdet += std::log(llt.matrixLLT()(i, i).real());
      integrand[node] = -2.0 * half_logdet;
    }
    return pairing(q.coeffs(), sigma) + quadrature(psi.grid(), integrand);
  }

  const std::vector<Mat> psi_inv = inverse_field(psi);
  for (std::size_t node = 0; node < psi.node_count(); ++node) {
    const Mat rinv = Eigen::LLT<Mat>(constraint.at(node)).solve(eye);
    const Mat a = psi_inv[node] * rinv;
    Mat power = a;
    for (int k = 1; k < nu - 1; ++k) power = power * a;
    integrand[node] = power.trace().real();
  }
  const double weight =
      static_cast<double>(nu) / static_cast<double>(nu - 1);
  return pairing(q.coeffs(), sigma) +
         weight * quadrature(psi.grid(), integrand);
}

}  // namespace

double dual_objective(const DualVariable& q, const CovarianceData& sigma,
                      const GridDensity& psi, int nu) {
  if (nu < 2)
    throw DomainError("dual_objective: nu must be >= 2 (see dual_objective_is)");
  return objective_impl(q, sigma, psi, nu);
}

double dual_objective_is(const DualVariable& q, const CovarianceData& sigma,
                         const GridDensity& psi) {
  return objective_impl(q, sigma, psi, 1);
}

HermitianCoeffs dual_gradient(const DualVariable& q, const CovarianceData& sigma,
                              const GridDensity& psi, int nu) {
  if (nu < 1) throw DomainError("dual_gradient: nu must be >= 1");
  check_problem(q.index_set(), q.m(), sigma, psi);

  const GridDensity phi = primal_density(q, psi, nu);
  const CovarianceData moments = gamma_moments(phi.field(), q.index_set());

  const IndexSet& lambda = q.index_set();
  const Mat zero_diff = sigma.at(lambda.zero_position()) -
                        moments.at(lambda.zero_position());
  const auto& half = lambda.half_positions();
  std::vector<Mat> half_diff(half.size());
  for (std::size_t h = 0; h < half.size(); ++h)
    half_diff[h] = sigma.at(half[h]) - moments.at(half[h]);
  return mirror_half_set(lambda, q.m(), zero_diff, half_diff);
}

std::string to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::converged_interior:
      return "converged-interior";
    case SolverStatus::boundary_suspect:
      return "boundary-suspect";
    case SolverStatus::norm_cap_hit:
      return "norm-cap-hit";
    case SolverStatus::max_iters:
      return "max-iters";
  }
  return "unknown";
}

SolverReport solve_dual(const CovarianceData& sigma, const GridDensity& psi,
                        int nu, const SolverOptions& opts) {
  if (nu < 1) throw DomainError("solve_dual: nu must be >= 1");
  if (!(opts.tol_grad > 0.0) || opts.max_iters < 1 ||
      !(opts.interior_margin > 0.0) || !(opts.armijo_c1 > 0.0) ||
      !(opts.backtrack_ratio > 0.0) || !(opts.backtrack_ratio < 1.0) ||
      !(opts.norm_cap > 0.0))
    throw DomainError("solve_dual: invalid solver options");

  const IndexSet& lambda = sigma.index_set();
  const int m = sigma.m();
  check_problem(lambda, m, sigma, psi);

  const auto value = [&](const DualVariable& q) {
    return nu == 1 ? dual_objective_is(q, sigma, psi)
                   : dual_objective(q, sigma, psi, nu);
  };

  DualVariable q(lambda, m);
  RealVec x = q.coords();
  double j_val = value(q);
  RealVec g = coeffs_to_coords(dual_gradient(q, sigma, psi, nu));
  double gn = g.norm();
  double margin = feasibility_margin(q, psi, nu);

  SolverReport report{std::move(q), j_val, gn, margin, 0,
                      SolverStatus::max_iters, {}};
  report.history.push_back(
      {0, j_val, pairing(report.q.coeffs(), sigma), gn, margin, 0.0});

  // Non-monotone watchdog: line search accepts against the worst of the
  // last few accepted values, so raw Barzilai-Borwein steps survive the
  // transient objective bumps they need to converge fast.
  constexpr std::size_t kWatchdogWindow = 10;
  std::vector<double> recent{j_val};

  RealVec x_prev;
  RealVec g_prev;
  int iter = 0;
  while (true) {
    if (gn <= opts.tol_grad) {
      report.status = SolverStatus::converged_interior;
      break;
    }
    if (x.norm() > opts.norm_cap) {
      report.status = SolverStatus::norm_cap_hit;
      break;
    }
    if (iter >= opts.max_iters) {
      report.status = SolverStatus::max_iters;
      break;
    }

    // Barzilai-Borwein initial step from the previous pair, else unit step.
    double step = 1.0;
    if (x_prev.size() == x.size()) {
      const RealVec s = x - x_prev;
      const RealVec y = g - g_prev;
      const double sy = s.dot(y);
      if (sy > 0.0 && std::isfinite(sy)) {
        step = s.dot(s) / sy;
        step = std::clamp(step, 1e-12, 1e12);
      }
    }

    bool margin_pressure = false;
    bool accepted = false;
    DualVariable q_next(lambda, m);
    double j_next = 0.0;
    double margin_next = 0.0;
    const double f_ref = *std::max_element(recent.begin(), recent.end());
    const double noise_floor = 1e-13 * (1.0 + std::abs(f_ref));
    for (int halvings = 0; halvings < 60; ++halvings) {
      const RealVec x_try = x - step * g;
      DualVariable q_try = DualVariable::from_coords(lambda, m, x_try);
      const double margin_try = feasibility_margin(q_try, psi, nu);
      if (margin_try < opts.interior_margin) {
        margin_pressure = true;
        step *= opts.backtrack_ratio;
        continue;
      }
      const double j_try = value(q_try);
      const double predicted = opts.armijo_c1 * step * gn * gn;
      const bool armijo_ok = j_try <= f_ref - predicted;
      // Near the optimum the Armijo decrease falls below double rounding;
      // accept any non-increase once the predicted decrease is noise.
      const bool noise_ok = j_try <= f_ref && predicted <= noise_floor;
      if (armijo_ok || noise_ok) {
        if ((x_try.array() == x.array()).all())
          break;  // step underflowed, no progress possible
        q_next = std::move(q_try);
        j_next = j_try;
        margin_next = margin_try;
        accepted = true;
        break;
      }
      step *= opts.backtrack_ratio;
    }

    if (!accepted) {
      report.status = margin_pressure ? SolverStatus::boundary_suspect
                                      : SolverStatus::max_iters;
      break;
    }

    x_prev = std::move(x);
    g_prev = g;
    x = q_next.coords();
    g = coeffs_to_coords(dual_gradient(q_next, sigma, psi, nu));
    gn = g.norm();
    j_val = j_next;
    margin = margin_next;
    report.q = std::move(q_next);
    recent.push_back(j_val);
    if (recent.size() > kWatchdogWindow) recent.erase(recent.begin());
    ++iter;
    report.history.push_back(
        {iter, j_val, pairing(report.q.coeffs(), sigma), gn, margin, step});
  }

  report.dual_value = j_val;
  report.grad_norm = gn;
  report.feasibility_margin = margin;
  report.iterations = iter;
  return report;
}

}  // namespace m2spec
