#pragma once

#include <stdexcept>
#include <string>

namespace m2spec {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shape or size of an argument does not fit (grid/field/matrix dimensions).
struct DimensionError : Error {
  using Error::Error;
};

/// A matrix or coefficient set violates the required Hermitian symmetry.
struct SymmetryError : Error {
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

/// A matrix is singular (or numerically so) where invertibility is required.
struct SingularityError : Error {
  using Error::Error;
};

/// A prior density fails the boundedness/coercivity requirements.
struct PriorInvalidError : Error {
  using Error::Error;
};

/// Index sets of two operands do not match.
struct IndexError : Error {
  using Error::Error;
};

/// A dual variable sits on or outside the boundary of the feasible set.
struct BoundaryError : Error {
  using Error::Error;
};

/// Input data violates a structural contract (e.g. covariance symmetry).
struct DataError : Error {
  using Error::Error;
};

/// A primal-dual certificate cannot be issued.
struct CertificateError : Error {
  using Error::Error;
};

/// File I/O or parse failure.
struct IoError : Error {
  using Error::Error;
};

}  // namespace m2spec
