#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "qngrc/block_encoding.hpp"
#include "qngrc/cost.hpp"
#include "qngrc/dims.hpp"

namespace qngrc {



/// Odd Chebyshev series approximating 1/(2κx) on [1/κ, 1].
///
/// Built from g(x) = (1 − (1 − x²)^b)/(2κx) with b = ⌈κ² ln(2κ/ε)⌉, which is odd,
/// bounded near 0 and within ε/(4κ) of 1/(2κx) on [1/κ, 1]; the series is cut at
/// the smallest odd degree whose error on the certification grid meets ε/(2κ).
struct InversionPolynomial {
  double kappa = 1.0;
  double eps = 1.0;
  std::vector<double> coefficients;  // Chebyshev basis, even entries zero
  int degree = 0;
  double smoothing = 0.0;            // the exponent b
  double certified_error = 0.0;      // max |P − 1/(2κx)| on the grid
  double certified_sup = 0.0;        // max |P| on the grid

  double operator()(double x) const;
};

/// Degree bound constant: certified polynomials satisfy degree ≤ C·κ·ln(κ/ε).
inline constexpr double kDegreeConstant = 2.0;
inline constexpr int kCertificationGrid = 10000;

InversionPolynomial build_inversion_polynomial(double kappa, double eps);

/// Grid certification over [1/κ, 1]: returns (max error vs 1/(2κx), max |P|).
std::pair<double, double> certify(const InversionPolynomial& poly, int points = kCertificationGrid);

BlockEncoding transform_singular_values(const BlockEncoding& be_A, const InversionPolynomial& poly);

std::pair<BlockEncoding, CostEstimate> pseudoinverse(const BlockEncoding& be_A, double kappa_A, double delta);

struct RegularizedInverse {
  BlockEncoding encoding;  // [[X†(XX†+λI)^{-1}, 0], [0, 0]] over the augmented system
  CostEstimate cost;
  double kappa = 1.0;      // regularized condition number of the augmented system
  double kappa_X = 1.0;
  double norm_X = 0.0;
};

RegularizedInverse regularized_pseudoinverse(const BlockEncoding& be_X, double lambda, double delta);

struct WeightEncodingOptions {
  std::optional<double> delta_X;  // defaults to δ_W/(2√2‖Y‖)
};

struct WeightEncoding {
  BlockEncoding encoding;
  CostEstimate cost;
  CostEstimate cost_simplified;
  double kappa = 1.0;
  double kappa_X = 1.0;
  double norm_X = 0.0;
  double norm_Y = 0.0;
  double delta_X = 0.0;
  double delta_Y = 0.0;
  double composed_error = 0.0;  // α_Y δ_X + α_X⁺ δ_Y before rounding up to δ_W
};

WeightEncoding build_weight_encoding(const BlockEncoding& be_X, const BlockEncoding& be_Y, double lambda,
                                     double delta_W, const CircuitDims& dims, const WeightEncodingOptions& opts = {});

/// α·block of the weight encoding restricted to the D × 8D² weight region.
Matrix unscaled_weights(const WeightEncoding& we, Eigen::Index D, Eigen::Index L);

}  // namespace qngrc
