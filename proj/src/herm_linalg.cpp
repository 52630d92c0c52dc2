#include "m2spec/herm_linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "m2spec/errors.hpp"

namespace m2spec {

Mat hermitized(const Mat& a, const char* what) {
  if (a.rows() != a.cols())
    throw DimensionError(std::string(what) + ": not square");
  const double scale = 1.0 + a.cwiseAbs().maxCoeff();
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > kHermRelTol * scale)
    throw SymmetryError(std::string(what) + ": not Hermitian");
  return 0.5 * (a + a.adjoint());
}

HermEig herm_eig(const Mat& a) {
  const Mat h = hermitized(a, "herm_eig input");
  Eigen::SelfAdjointEigenSolver<Mat> solver(h);
  if (solver.info() != Eigen::Success)
    throw Error("herm_eig: eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Mat matrix_power(const Mat& a, double c) {
  if (c == 1.0) return hermitized(a, "matrix_power input");
  if (c == 0.0) return Mat::Identity(a.rows(), a.cols());

  HermEig eig = herm_eig(a);
  RealVec& lam = eig.eigenvalues;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] < -kEigClip)
      throw DomainError("matrix_power: matrix has a negative eigenvalue");
    if (lam[i] < 0.0) lam[i] = 0.0;
  }
  if (c < 0.0 && lam[0] <= kPowerFloor)
    throw SingularityError(
        "matrix_power: negative power of a (near-)singular matrix");

  RealVec powered(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) powered[i] = std::pow(lam[i], c);
  const Mat out =
      eig.eigenvectors * powered.asDiagonal() * eig.eigenvectors.adjoint();
  return 0.5 * (out + out.adjoint());
}

Mat sqrt_factor(const Mat& a, FactorKind kind) {
  const Mat h = hermitized(a, "sqrt_factor input");
  if (kind == FactorKind::cholesky) {
    Eigen::LLT<Mat> llt(h);
    if (llt.info() != Eigen::Success)
      throw DomainError("sqrt_factor: matrix is not positive definite");
    return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<Mat> solver(h);
  if (solver.info() != Eigen::Success)
    throw Error("sqrt_factor: eigendecomposition failed");
  if (solver.eigenvalues()[0] <= 0.0)
    throw DomainError("sqrt_factor: matrix is not positive definite");
  const Mat out = solver.eigenvectors() *
                  solver.eigenvalues().cwiseSqrt().asDiagonal() *
                  solver.eigenvectors().adjoint();
  return 0.5 * (out + out.adjoint());
}

EigRange eig_range(const HermField& field) {
  EigRange range{std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
  Eigen::SelfAdjointEigenSolver<Mat> solver;
  for (const Mat& sample : field.samples) {
    solver.compute(sample, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
      throw Error("eig_range: eigendecomposition failed");
    range.min = std::min(range.min, solver.eigenvalues()[0]);
    range.max = std::max(range.max, solver.eigenvalues()[field.m - 1]);
  }
  return range;
}

double min_eig_field(const HermField& field) { return eig_range(field).min; }

double pairing(const HermitianCoeffs& a, const HermitianCoeffs& b) {
  if (!(a.index_set() == b.index_set()))
    throw IndexError("pairing: operands live on different index sets");
  if (a.m() != b.m())
    throw DimensionError("pairing: operands have different matrix dimensions");
  Cplx total = 0.0;
  for (std::size_t p = 0; p < a.index_set().size(); ++p)
    total += a.at(p).cwiseProduct(b.at(p).conjugate()).sum();
  if (std::abs(total.imag()) > 1e-10 * (1.0 + std::abs(total.real())))
    throw SymmetryError("pairing: value has a non-vanishing imaginary part");
  return total.real();
}

}  // namespace m2spec
