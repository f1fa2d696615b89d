#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace qngrc {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Unit-norm amplitude vector; qubit 0 is the most significant bit of the index.
using StateVector = Eigen::VectorXcd;

}  // namespace qngrc
