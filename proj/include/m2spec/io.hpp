#pragma once

#include <string>

#include "m2spec/spectra.hpp"
#include "m2spec/torus_grid.hpp"

namespace m2spec {

/// Coefficient files (covariance data, polynomial prior coefficients) are
/// UTF-8 JSON: dimensions, the explicit index list, and one matrix per
/// index as paired real/imaginary row-major 2-D arrays. `kind` is stamped
/// into the file and checked on read ("covariance" or "polynomial").
void write_coeffs(const std::string& path, const HermitianCoeffs& coeffs,
                  const std::string& kind);
HermitianCoeffs read_coeffs(const std::string& path, const std::string& kind);

void write_covariance(const std::string& path, const CovarianceData& sigma);
CovarianceData read_covariance(const std::string& path);

/// Grid density files are binary: magic "MGRD1", little-endian uint64
/// fields d, m, N, then N^d * m^2 complex samples as interleaved
/// real/imaginary doubles, node-major (lexicographic), matrix row-major.
void write_grid_density(const std::string& path, const GridDensity& density);
GridDensity read_grid_density(const std::string& path);

}  // namespace m2spec
