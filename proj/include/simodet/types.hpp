#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace simodet {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

}  // namespace simodet
