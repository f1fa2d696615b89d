#include "qngrc/linalg.hpp"

#include <bit>
#include <cmath>

#include "qngrc/errors.hpp"

namespace qngrc::linalg {

double spectral_norm(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  auto s = singular_values(A);
  return s.size() ? s(0) : 0.0;
}

RealVector singular_values(const Matrix& A) {
  if (A.size() == 0) return RealVector();
  if (A.rows() * A.cols() <= 64 * 64) {
    Eigen::JacobiSVD<Matrix> svd(A);
    return svd.singularValues();
  }
  Eigen::BDCSVD<Matrix> svd(A);
  return svd.singularValues();
}

double unitarity_residual(const Matrix& U) {
  if (U.rows() != U.cols()) throw DimensionMismatch("unitarity check needs a square matrix");
  Matrix R = U.adjoint() * U - Matrix::Identity(U.rows(), U.cols());
  // Hermitian residual: the largest |eigenvalue| is the spectral norm.
  Eigen::SelfAdjointEigenSolver<Matrix> es(R, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_pow2(std::uint64_t n) { return n && !(n & (n - 1)); }

std::uint64_t next_pow2(std::uint64_t n) {
  std::uint64_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

int ilog2(std::uint64_t n) {
  if (!is_pow2(n)) throw InvalidArgument("ilog2 of a non power of two: " + std::to_string(n));
  int k = 0;
  while ((std::uint64_t{1} << k) < n) ++k;
  return k;
}

int ceil_log2(std::uint64_t n) {
  int k = 0;
  while ((std::uint64_t{1} << k) < n) ++k;
  return k;
}

Matrix pad(const Matrix& A, Eigen::Index rows, Eigen::Index cols) {
  if (rows < A.rows() || cols < A.cols()) throw DimensionMismatch("pad target smaller than source");
  Matrix P = Matrix::Zero(rows, cols);
  P.topLeftCorner(A.rows(), A.cols()) = A;
  return P;
}

Eigen::Index numerical_rank(const RealVector& sigma, double rel_tol) {
  if (sigma.size() == 0 || sigma(0) <= 0.0) return 0;
  const double cut = rel_tol * sigma(0);
  Eigen::Index r = 0;
  while (r < sigma.size() && sigma(r) > cut) ++r;
  return r;
}

namespace {

Vector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double re = g(rng);
    double im = g(rng);
    v(i) = cplx(re, im);
  }
  return v;
}

}  // namespace

Matrix complete_unitary(const Matrix& Q, std::mt19937_64& rng) {
  const Eigen::Index n = Q.rows();
  if (Q.cols() > n) throw DimensionMismatch("more columns than rows in unitary completion");
  Matrix U(n, n);
  U.leftCols(Q.cols()) = Q;
  Eigen::Index filled = Q.cols();
  int attempts = 0;
  while (filled < n) {
    Vector v = random_vector(n, rng);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < filled; ++j) v -= U.col(j) * U.col(j).dot(v);
    double nv = v.norm();
    if (nv < 1e-8) {
      if (++attempts > 100) throw NumericalFailure("unitary completion failed to find a new direction");
      continue;
    }
    U.col(filled++) = v / nv;
  }
  return U;
}

Matrix hadamard_layer(int n_qubits) {
  const Eigen::Index n = Eigen::Index{1} << n_qubits;
  Matrix H(n, n);
  const double s = std::pow(2.0, -0.5 * n_qubits);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      H(i, j) = (std::popcount(static_cast<std::uint64_t>(i & j)) & 1) ? -s : s;
  return H;
}

Vector random_state(Eigen::Index dim, std::mt19937_64& rng) {
  Vector v = random_vector(dim, rng);
  return v / v.norm();
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  Matrix A(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) A.col(j) = random_vector(rows, rng);
  return A;
}

Matrix random_unitary(Eigen::Index dim, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(dim, dim, rng));
  Matrix Q = qr.householderQ() * Matrix::Identity(dim, dim);
  Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    cplx d = R(j, j);
    if (std::abs(d) > 0) Q.col(j) *= d / std::abs(d);
  }
  return Q;
}

WideSvd::WideSvd(const Matrix& A) {
  wide_ = A.cols() > A.rows();
  if (!wide_) {
    Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    U_ = svd.matrixU();
    sigma_ = svd.singularValues();
    Vr_ = svd.matrixV();
    return;
  }
  // A† = Q R  ⇒  A = R† Q†; the SVD of the small square R† gives U and σ.
  qr_.compute(A.adjoint());
  const Eigen::Index k = A.rows();
  Matrix Rh = qr_.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  Rh.adjointInPlace();
  Eigen::BDCSVD<Matrix> svd(Rh, Eigen::ComputeThinU | Eigen::ComputeThinV);
  U_ = svd.matrixU();
  sigma_ = svd.singularValues();
  Vr_ = svd.matrixV();
}

Matrix WideSvd::times_V(const Matrix& B) const {
  if (!wide_) return B * Vr_;
  // B·V = B·Q_thin·Vr = (Q_thin†·B†)†·Vr.
  Matrix Bh = B.adjoint();
  Bh.applyOnTheLeft(qr_.householderQ().adjoint());
  Matrix BQ = Bh.topRows(Vr_.rows()).adjoint();
  return BQ * Vr_;
}

}  // namespace qngrc::linalg
