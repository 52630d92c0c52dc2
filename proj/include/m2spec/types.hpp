#pragma once

#include <complex>

#include <Eigen/Dense>

namespace m2spec {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;

}  // namespace m2spec
