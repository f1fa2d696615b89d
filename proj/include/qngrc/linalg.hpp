#pragma once

#include <cstdint>
#include <random>

#include "qngrc/types.hpp"

namespace qngrc::linalg {

/// Largest singular value.
double spectral_norm(const Matrix& A);

/// Singular values in decreasing order.
RealVector singular_values(const Matrix& A);

/// ‖U†U − I‖ in spectral norm.
double unitarity_residual(const Matrix& U);

bool is_pow2(std::uint64_t n);
std::uint64_t next_pow2(std::uint64_t n);
int ilog2(std::uint64_t n);
/// Smallest t with 2^t ≥ n (0 for n ≤ 1).
int ceil_log2(std::uint64_t n);

/// Zero-pad A into the top-left corner of an n×n matrix.
Matrix pad(const Matrix& A, Eigen::Index rows, Eigen::Index cols);

/// Number of singular values above rel_tol·σ_max.
Eigen::Index numerical_rank(const RealVector& sigma, double rel_tol = 1e-12);

/// Extends the orthonormal columns of Q (n×k) to an n×n unitary.  Candidate
/// vectors come from `rng`, orthogonalized by two passes of modified Gram–Schmidt.
Matrix complete_unitary(const Matrix& Q, std::mt19937_64& rng);

Matrix hadamard_layer(int n_qubits);

Vector random_state(Eigen::Index dim, std::mt19937_64& rng);
Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);
Matrix random_unitary(Eigen::Index dim, std::mt19937_64& rng);

/// A = U diag(σ) V† for a possibly very wide A, computed from an SVD of the
/// triangular factor of A†'s QR decomposition.  V is kept implicit: only
/// products B·V are available, which is all the regression needs.
class WideSvd {
 public:
  explicit WideSvd(const Matrix& A);

  const Matrix& U() const { return U_; }
  const RealVector& sigma() const { return sigma_; }
  /// B·V for B with A.cols() columns; result has min(rows, cols) columns.
  Matrix times_V(const Matrix& B) const;

 private:
  Matrix U_;
  RealVector sigma_;
  Matrix Vr_;                                  // right factor of the small SVD
  Eigen::HouseholderQR<Matrix> qr_;            // QR of A† when A is wide
  bool wide_ = false;
};

}  // namespace qngrc::linalg
