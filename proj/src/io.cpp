#include "m2spec/io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <utility>
#include <vector>

#include <json.hpp>

#include "m2spec/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "grid density files assume a little-endian host");

namespace m2spec {

namespace {

using nlohmann::json;

json matrix_to_json(const Mat& a) {
  const int rows = static_cast<int>(a.rows());
  const int cols = static_cast<int>(a.cols());
  json re = json::array();
  json im = json::array();
  for (int i = 0; i < rows; ++i) {
    json rrow = json::array();
    json irow = json::array();
    for (int j = 0; j < cols; ++j) {
      rrow.push_back(a(i, j).real());
      irow.push_back(a(i, j).imag());
    }
    re.push_back(std::move(rrow));
    im.push_back(std::move(irow));
  }
  return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

Mat matrix_from_json(const json& j, int m) {
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (static_cast<int>(re.size()) != m || static_cast<int>(im.size()) != m)
    throw DataError("coefficient file: matrix has wrong number of rows");
  Mat a(m, m);
  for (int i = 0; i < m; ++i) {
    const auto& rrow = re.at(i);
    const auto& irow = im.at(i);
    if (static_cast<int>(rrow.size()) != m ||
        static_cast<int>(irow.size()) != m)
      throw DataError("coefficient file: matrix has wrong number of columns");
    for (int j2 = 0; j2 < m; ++j2)
      a(i, j2) = Cplx(rrow.at(j2).get<double>(), irow.at(j2).get<double>());
  }
  return a;
}

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("failed to parse " + path + ": " + e.what());
  }
  return j;
}

}  // namespace

void write_coeffs(const std::string& path, const HermitianCoeffs& coeffs,
                  const std::string& kind) {
  const IndexSet& lambda = coeffs.index_set();
  json indices = json::array();
  for (std::size_t p = 0; p < lambda.size(); ++p)
    indices.push_back(lambda[p]);
  json matrices = json::array();
  for (std::size_t p = 0; p < lambda.size(); ++p)
    matrices.push_back(matrix_to_json(coeffs.at(p)));

  const json j{{"kind", kind},
               {"d", lambda.dim()},
               {"m", coeffs.m()},
               {"indices", std::move(indices)},
               {"matrices", std::move(matrices)},
               {"moment_convention", "grid-consistent moments"}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << j.dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

HermitianCoeffs read_coeffs(const std::string& path, const std::string& kind) {
  const json j = parse_file(path);
  try {
    if (j.at("kind").get<std::string>() != kind)
      throw DataError("file " + path + " is not a " + kind + " file");
    const int d = j.at("d").get<int>();
    const int m = j.at("m").get<int>();
    std::vector<MultiIndex> indices;
    for (const auto& idx : j.at("indices"))
      indices.push_back(idx.get<MultiIndex>());
    const auto& matrices = j.at("matrices");
    if (matrices.size() != indices.size())
      throw DataError("coefficient file: one matrix per index required");
    std::vector<Mat> coeffs;
    coeffs.reserve(matrices.size());
    for (const auto& mj : matrices) coeffs.push_back(matrix_from_json(mj, m));
    return HermitianCoeffs(IndexSet(d, std::move(indices)), std::move(coeffs));
  } catch (const json::exception& e) {
    throw DataError("malformed coefficient file " + path + ": " + e.what());
  } catch (const SymmetryError& e) {
    throw DataError("coefficient file " + path + ": " + e.what());
  } catch (const Error& e) {
    throw DataError("coefficient file " + path + ": " + e.what());
  }
}

void write_covariance(const std::string& path, const CovarianceData& sigma) {
  write_coeffs(path, sigma, "covariance");
}

CovarianceData read_covariance(const std::string& path) {
  return read_coeffs(path, "covariance");
}

void write_grid_density(const std::string& path, const GridDensity& density) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out.write("MGRD1", 5);
  const std::uint64_t header[3] = {
      static_cast<std::uint64_t>(density.grid().dim()),
      static_cast<std::uint64_t>(density.m()),
      static_cast<std::uint64_t>(density.grid().points_per_axis())};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  const int m = density.m();
  for (std::size_t node = 0; node < density.node_count(); ++node) {
    const Mat& a = density.at(node);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const double pair[2] = {a(i, j).real(), a(i, j).imag()};
        out.write(reinterpret_cast<const char*>(pair), sizeof(pair));
      }
  }
  if (!out) throw IoError("write failed: " + path);
}

GridDensity read_grid_density(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  char magic[5];
  in.read(magic, 5);
  if (!in || std::string(magic, 5) != "MGRD1")
    throw DataError("not a grid density file: " + path);
  std::uint64_t header[3];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw DataError("truncated grid density file: " + path);
  if (header[0] < 1 || header[0] > 8 || header[1] < 1 || header[1] > 64 ||
      header[2] < 1 || header[2] > 4096)
    throw DataError("grid density file has implausible dimensions: " + path);

  const int d = static_cast<int>(header[0]);
  const int m = static_cast<int>(header[1]);
  const int n = static_cast<int>(header[2]);
  const TorusGrid grid(d, n);
  std::vector<Mat> samples(grid.node_count());
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    Mat a(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double pair[2];
        in.read(reinterpret_cast<char*>(pair), sizeof(pair));
        if (!in) throw DataError("truncated grid density file: " + path);
        a(i, j) = Cplx(pair[0], pair[1]);
      }
    samples[node] = std::move(a);
  }
  try {
    return GridDensity(HermField(grid, m, std::move(samples)));
  } catch (const Error& e) {
    throw DataError("grid density file " + path + ": " + e.what());
  }
}

}  // namespace m2spec
