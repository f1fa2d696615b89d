#include "qngrc/block_encoding.hpp"

#include <cmath>

#include "qngrc/errors.hpp"
#include "qngrc/linalg.hpp"

namespace qngrc {

namespace {

constexpr double kClamp = 1e-14;

void require_square_pow2(const Matrix& U) {
  if (U.rows() != U.cols() || !linalg::is_pow2(static_cast<std::uint64_t>(U.rows())))
    throw DimensionMismatch("block-encoding unitary must be square with power-of-two dimension");
}

Matrix padded_reference(const BlockEncoding& be, const Matrix& A) {
  const Eigen::Index n = be.system_dim();
  if (A.rows() > n || A.cols() > n)
    throw DimensionMismatch("reference " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()) +
                            " does not fit the " + std::to_string(n) + "-dimensional encoded block");
  return linalg::pad(A, n, n);
}

BlockEncoding from_block(const Matrix& B, double alpha, Eigen::Index rows, Eigen::Index cols) {
  BlockEncoding be;
  be.unitary = dilation(B);
  be.alpha = alpha;
  be.n_ancilla = 1;
  be.realized_ancillas = 1;
  be.block_rows = rows;
  be.block_cols = cols;
  return be;
}

}  // namespace

double BlockEncoding::unitarity_residual() const { return linalg::unitarity_residual(unitary); }

double verify_encoding(const BlockEncoding& be, const Matrix& A) {
  require_square_pow2(be.unitary);
  if (be.unitary.rows() != (be.system_dim() << be.realized_ancillas))
    throw DimensionMismatch("unitary dimension is not 2^a times the block dimension");
  return linalg::spectral_norm(padded_reference(be, A) - be.alpha * be.block());
}

Matrix dilation(const Matrix& B) {
  if (B.rows() != B.cols()) throw DimensionMismatch("dilation needs a square block");
  const Eigen::Index n = B.rows();
  Eigen::BDCSVD<Matrix> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  RealVector c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double g = 1.0 - std::min(1.0, s(i)) * std::min(1.0, s(i));
    c(i) = g < kClamp ? 0.0 : std::sqrt(g);
  }
  // Both square roots share σ, so B·√(I−B†B) = √(I−BB†)·B holds to roundoff.
  const Matrix& U = svd.matrixU();
  const Matrix& V = svd.matrixV();
  Matrix D(2 * n, 2 * n);
  D.topLeftCorner(n, n) = B;
  D.topRightCorner(n, n) = U * c.asDiagonal() * U.adjoint();
  D.bottomLeftCorner(n, n) = V * c.asDiagonal() * V.adjoint();
  D.bottomRightCorner(n, n) = -B.adjoint();
  return D;
}

BlockEncoding embed(const Matrix& A, double alpha) {
  if (A.size() == 0) throw DimensionMismatch("cannot embed an empty matrix");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("subnormalization must be positive and finite");
  const double normA = linalg::spectral_norm(A);
  if (alpha < normA * (1.0 - 1e-12))
    throw PreconditionViolated("infeasible subnormalization: alpha = " + std::to_string(alpha) + " < ||A|| = " +
                               std::to_string(normA));
  const auto n = static_cast<Eigen::Index>(linalg::next_pow2(static_cast<std::uint64_t>(std::max(A.rows(), A.cols()))));
  return from_block(linalg::pad(A, n, n) / alpha, alpha, A.rows(), A.cols());
}

BlockEncoding multiply(const BlockEncoding& be_A, const BlockEncoding& be_B) {
  const Eigen::Index n = be_A.system_dim();
  if (be_B.system_dim() != n)
    throw DimensionMismatch("encoded blocks live on different system sizes (" + std::to_string(n) + " vs " +
                            std::to_string(be_B.system_dim()) + ")");
  if (be_A.block_cols != be_B.block_rows)
    throw DimensionMismatch("inner block dimensions differ: " + std::to_string(be_A.block_cols) + " vs " +
                            std::to_string(be_B.block_rows));
  const Eigen::Index nA = Eigen::Index{1} << be_A.realized_ancillas;
  const Eigen::Index nB = Eigen::Index{1} << be_B.realized_ancillas;
  const Eigen::Index N = nA * nB * n;
  // Register order: [A ancillas][B ancillas][system].
  Matrix UA = Matrix::Zero(N, N);  // U_A on (A ancillas, system), identity on B's
  for (Eigen::Index ib = 0; ib < nB; ++ib)
    for (Eigen::Index ia = 0; ia < nA; ++ia)
      for (Eigen::Index ja = 0; ja < nA; ++ja)
        UA.block((ia * nB + ib) * n, (ja * nB + ib) * n, n, n) = be_A.unitary.block(ia * n, ja * n, n, n);
  Matrix UB = Matrix::Zero(N, N);  // I_{A ancillas} ⊗ U_B
  for (Eigen::Index ia = 0; ia < nA; ++ia) UB.block(ia * nB * n, ia * nB * n, nB * n, nB * n) = be_B.unitary;

  BlockEncoding out;
  out.unitary.noalias() = UA * UB;
  out.alpha = be_A.alpha * be_B.alpha;
  out.n_ancilla = be_A.n_ancilla + be_B.n_ancilla;
  out.epsilon = be_A.alpha * be_B.epsilon + be_B.alpha * be_A.epsilon;
  out.realized_ancillas = be_A.realized_ancillas + be_B.realized_ancillas;
  out.block_rows = be_A.block_rows;
  out.block_cols = be_B.block_cols;
  out.cost = be_A.cost + be_B.cost;
  return out;
}

Matrix augmented_matrix(const Matrix& X_padded, double lambda) {
  const Eigen::Index n = X_padded.rows();
  if (X_padded.cols() != n) throw DimensionMismatch("augmentation expects the square padded block");
  Matrix XI = Matrix::Zero(2 * n, 2 * n);
  XI.topLeftCorner(n, n) = X_padded;
  XI.topRightCorner(n, n) = std::sqrt(lambda) * Matrix::Identity(n, n);
  return XI;
}

BlockEncoding augment_tikhonov(const BlockEncoding& be_X, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
  const Eigen::Index n = be_X.system_dim();
  // M_B needs one ancilla to swap with; give a bare unitary an idle one.
  Matrix UX = be_X.unitary;
  int ar = be_X.realized_ancillas;
  if (ar == 0) {
    Matrix W = Matrix::Zero(2 * n, 2 * n);
    W.topLeftCorner(n, n) = UX;
    W.bottomRightCorner(n, n) = UX;
    UX = std::move(W);
    ar = 1;
  }
  const Eigen::Index na = Eigen::Index{1} << ar;
  const Eigen::Index half = na / 2;  // value of the leading ancilla bit
  const Eigen::Index M = na * 2 * n;  // [ancillas][top][system]
  auto idx = [n](Eigen::Index a, Eigen::Index t, Eigen::Index s) { return (a * 2 + t) * n + s; };

  // C_X = |0⟩⟨0|_top ⊗ U_X + |1⟩⟨1|_top ⊗ (X on the leading ancilla).
  Matrix CX = Matrix::Zero(M, M);
  for (Eigen::Index a = 0; a < na; ++a)
    for (Eigen::Index b = 0; b < na; ++b) CX.block(idx(a, 0, 0), idx(b, 0, 0), n, n) = UX.block(a * n, b * n, n, n);
  for (Eigen::Index a = 0; a < na; ++a)
    for (Eigen::Index s = 0; s < n; ++s) CX(idx(a ^ half, 1, s), idx(a, 1, s)) = 1.0;

  // M_B = SWAP(leading ancilla, top)·(X on top): a (1,1,0)-encoding of |0⟩⟨1|.
  Matrix MB = Matrix::Zero(M, M);
  for (Eigen::Index a = 0; a < na; ++a)
    for (Eigen::Index t = 0; t < 2; ++t)
      for (Eigen::Index s = 0; s < n; ++s) {
        const Eigen::Index a0 = a / half, rest = a % half;
        const Eigen::Index t1 = t ^ 1;
        MB(idx(t1 * half + rest, a0, s), idx(a, t, s)) = 1.0;
      }

  // LCU over a selector qubit prepared as (√α_X|0⟩ + λ^{1/4}|1⟩)/√(α_X+√λ).
  const double sl = std::sqrt(lambda);
  const double norm = be_X.alpha + sl;
  const double c0 = std::sqrt(be_X.alpha / norm), c1 = std::sqrt(sl / norm);
  const double prep[2][2] = {{c0, -c1}, {c1, c0}};
  BlockEncoding out;
  out.unitary.resize(2 * M, 2 * M);
  for (int s = 0; s < 2; ++s)
    for (int sp = 0; sp < 2; ++sp)
      out.unitary.block(s * M, sp * M, M, M) = prep[0][s] * prep[0][sp] * CX + prep[1][s] * prep[1][sp] * MB;
  out.alpha = norm;
  out.n_ancilla = be_X.n_ancilla;
  out.epsilon = be_X.epsilon;
  out.realized_ancillas = 1 + ar;
  out.block_rows = 2 * n;
  out.block_cols = 2 * n;
  out.cost = be_X.cost;
  return out;
}

std::pair<BlockEncoding, CostEstimate> preamplify(const BlockEncoding& be, const Matrix& A_ref, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("pre-amplification target delta must be positive");
  if (be.epsilon > delta / 2)
    throw PreconditionViolated("pre-amplification requires epsilon <= delta/2, got epsilon = " +
                               std::to_string(be.epsilon) + ", delta = " + std::to_string(delta));
  const Matrix ref = padded_reference(be, A_ref);
  const double normA = linalg::spectral_norm(ref);
  if (!(normA > 0.0)) throw DegeneratePrediction("cannot pre-amplify an encoding of the zero matrix");
  const double target = std::sqrt(2.0) * normA;
  const Matrix realized = be.alpha * be.block();
  const double nr = linalg::spectral_norm(realized);
  if (nr > target * (1.0 + 1e-12))
    throw PreconditionViolated("encoded block norm " + std::to_string(nr) + " exceeds sqrt(2)||A|| = " +
                               std::to_string(target));
  BlockEncoding out = from_block(realized / target, target, be.block_rows, be.block_cols);
  out.n_ancilla = be.n_ancilla + 1;
  out.epsilon = delta;

  CostEstimate c;
  c.formula_id = "preamplification";
  c.expression = "O((alpha/||A||) log(||A||/delta)) * T_in";
  c.prefactor = (be.alpha / normA) * log_factor(normA / delta);
  c.training_calls = c.prefactor * be.cost;
  c.scalars = {{"alpha_in", be.alpha}, {"norm_A", normA}, {"delta", delta}};
  out.cost = c.training_calls;
  return {std::move(out), std::move(c)};
}

PostSelected apply_to_state(const BlockEncoding& be, const StateVector& b) {
  const Eigen::Index n = be.system_dim();
  if (b.size() != be.block_cols && b.size() != n)
    throw DimensionMismatch("state of dimension " + std::to_string(b.size()) + " does not match block columns " +
                            std::to_string(be.block_cols));
  if (std::abs(b.norm() - 1.0) > 1e-8) throw InvalidArgument("input state is not unit norm");
  Vector in = Vector::Zero(n);
  in.head(b.size()) = b;
  // |0⟩^a ⊗ |b⟩ occupies the first n amplitudes; the projection keeps the first n outputs.
  Vector full = be.unitary.leftCols(n) * in;
  Vector proj = full.head(n);
  PostSelected r;
  r.probability = proj.squaredNorm();
  if (r.probability < 1e-14)
    throw DegeneratePrediction("post-selection success probability " + std::to_string(r.probability) +
                               " is below 1e-14");
  Vector head = proj.head(be.block_rows);
  const double hn = head.norm();
  if (!(hn > 0.0)) throw DegeneratePrediction("post-selected state vanishes on the logical rows");
  r.state = head / hn;
  return r;
}

BlockEncoding top_left_view(const BlockEncoding& be, int extra, Eigen::Index rows, Eigen::Index cols) {
  if (extra < 0) throw InvalidArgument("negative qubit count");
  BlockEncoding out = be;
  out.realized_ancillas = be.realized_ancillas + extra;
  if (rows > out.system_dim() || cols > out.system_dim())
    throw DimensionMismatch("logical block exceeds the remaining system dimension");
  out.block_rows = rows;
  out.block_cols = cols;
  return out;
}

BlockEncoding reembed(const BlockEncoding& be, double alpha) {
  const Matrix realized = be.alpha * be.block();
  const double nr = linalg::spectral_norm(realized);
  if (alpha < nr * (1.0 - 1e-12))
    throw PreconditionViolated("infeasible subnormalization: alpha = " + std::to_string(alpha) +
                               " < encoded norm " + std::to_string(nr));
  BlockEncoding out = from_block(realized / alpha, alpha, be.block_rows, be.block_cols);
  out.n_ancilla = be.n_ancilla;
  out.epsilon = be.epsilon;
  out.cost = be.cost;
  return out;
}

}  // namespace qngrc
