#pragma once

#include <utility>

#include "qngrc/cost.hpp"
#include "qngrc/types.hpp"

namespace qngrc {

/// A unitary whose top-left block, scaled by alpha, approximates a matrix A.
///
/// Ancilla qubits are the most significant qubits of the unitary's index, so the
/// block is the leading system_dim()×system_dim() corner.  `n_ancilla` is the
/// contract count carried through the parameter algebra; `realized_ancillas` is
/// how many leading qubits this particular dense unitary actually projects out.
/// They differ because compact dilations stand in for the original circuits.
struct BlockEncoding {
  Matrix unitary;
  double alpha = 1.0;
  int n_ancilla = 0;
  double epsilon = 0.0;
  Eigen::Index block_rows = 0;
  Eigen::Index block_cols = 0;
  int realized_ancillas = 0;
  double cost = 1.0;  // oracle calls (T_O units) per use of the unitary

  Eigen::Index system_dim() const { return unitary.rows() >> realized_ancillas; }
  /// (⟨0|^a ⊗ I) U (|0⟩^a ⊗ I), system_dim square.
  Matrix block() const { return unitary.topLeftCorner(system_dim(), system_dim()); }
  /// α·block restricted to the logical block dimensions.
  Matrix encoded() const { return alpha * unitary.topLeftCorner(block_rows, block_cols); }
  double unitarity_residual() const;
};

double verify_encoding(const BlockEncoding& be, const Matrix& A);

/// Unitary [[B, √(I−BB†)], [√(I−B†B), −B†]] for a square contraction B.
Matrix dilation(const Matrix& B);

BlockEncoding embed(const Matrix& A, double alpha);

BlockEncoding multiply(const BlockEncoding& be_A, const BlockEncoding& be_B);

/// [[X, √λ I], [0, 0]] over the padded system of be_X, as the dense reference.
Matrix augmented_matrix(const Matrix& X_padded, double lambda);
BlockEncoding augment_tikhonov(const BlockEncoding& be_X, double lambda);

std::pair<BlockEncoding, CostEstimate> preamplify(const BlockEncoding& be, const Matrix& A_ref, double delta);

struct PostSelected {
  StateVector state;
  double probability = 0.0;
};
PostSelected apply_to_state(const BlockEncoding& be, const StateVector& b);

/// Treats the `extra` most significant system qubits as additional ancillas,
/// exposing the leading corner as a block of the given logical size.  The contract
/// ancilla count is left unchanged.
BlockEncoding top_left_view(const BlockEncoding& be, int extra, Eigen::Index rows, Eigen::Index cols);

/// Re-embeds the encoded matrix with a different subnormalization.
BlockEncoding reembed(const BlockEncoding& be, double alpha);

}  // namespace qngrc
