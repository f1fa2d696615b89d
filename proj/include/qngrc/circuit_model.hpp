#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "qngrc/block_encoding.hpp"
#include "qngrc/circuit.hpp"
#include "qngrc/cost.hpp"
#include "qngrc/dims.hpp"
#include "qngrc/quantum_dynamics.hpp"

namespace qngrc {

inline constexpr std::uint64_t kOracleSeed = 0x5eed0a11ULL;

/// O = Σ_k V_k ⊗ |k⟩⟨k| on [data d][index t] with V_k|0⟩ = |s_{k+offset}⟩.
/// Columns of V_k beyond the first come from a seeded Gram–Schmidt completion;
/// V_k = I for indices k ≥ T.
class DataOracle {
 public:
  DataOracle(const TimeSeries& series, std::int64_t offset, std::int64_t T, std::uint64_t seed = kOracleSeed);

  int d() const { return d_; }
  int t() const { return t_; }
  std::int64_t T() const { return T_; }
  std::int64_t offset() const { return offset_; }
  Eigen::Index D() const { return Eigen::Index{1} << d_; }

  const std::vector<Matrix>& blocks() const { return blocks_; }
  /// |s_{k+offset}⟩ for 0 ≤ k < T.
  StateVector column(std::int64_t k) const;
  /// Dense unitary on d + t qubits, data most significant.
  Matrix unitary() const;

  /// Multiplexed gate on the given registers; each call bumps the shared tally.
  Gate gate(const std::vector<int>& data, const std::vector<int>& index) const;
  long calls() const { return calls_->load(); }

 private:
  int d_ = 0;
  int t_ = 0;
  std::int64_t T_ = 0;
  std::int64_t offset_ = 0;
  std::vector<Matrix> blocks_;
  std::shared_ptr<std::atomic<long>> calls_;
};

DataOracle oracle_from_series(const TimeSeries& series, std::int64_t offset, std::int64_t T,
                              std::uint64_t seed = kOracleSeed);

/// Registers [sel η][data d][index t]: Hadamards on sel, then Σ_j |j⟩⟨j| ⊗ O_{−jΔ}.
Circuit build_u_lin(const std::vector<DataOracle>& oracles, int m);

/// Registers [ctrl][copy_1 .. copy_p][index]; each copy is the sel+data pair of U^lin.
Circuit build_u_f(const Circuit& u_lin, int p);

/// Qubits in the feature part of U^f (everything but the index register).
int feature_width(const Circuit& u_f);

/// Output of U^f on |0⟩|k⟩ restricted to the feature register (index must stay k).
Vector feature_state(const Circuit& u_f, std::int64_t k);

/// [A: r][B: r] with U^f on the low qubits of A and B, SWAP(A, B), then G on A.
Circuit feature_encoding_circuit(const Circuit& u_f, const CircuitDims& dims);
Circuit target_encoding_circuit(const DataOracle& oracle_tau, const CircuitDims& dims);

/// (√T, max(2d+3,t), 0) encoding of X: the block is read off by simulating the
/// encoding circuit on its T input columns and re-embedded in a one-qubit dilation.
BlockEncoding feature_block_encoding(const Circuit& u_f, const CircuitDims& dims);
/// Same encoding with the full circuit unitary (every one of the r ancillas realized).
BlockEncoding feature_block_encoding_dense(const Circuit& u_f, const CircuitDims& dims);

/// (√2‖Y‖, max(2d+3,t)+1, δ_Y) encoding of Y after pre-amplification.
BlockEncoding target_block_encoding(const DataOracle& oracle_tau, const CircuitDims& dims, double delta_Y);

struct PredictionOutput {
  std::vector<StateVector> states;
  std::vector<double> probabilities;
  std::vector<Vector> features;
  CostEstimate cost;
  double norm_W = 0.0;
  double kappa_W = 1.0;
};

PredictionOutput prediction_circuit(const BlockEncoding& be_W, const std::vector<DataOracle>& oracles_tilde,
                                    const CircuitDims& dims, double delta, int p = 2);

struct IterativeOptions {
  int m = 2;
  int p = 2;
  int delta = 1;
  int max_qubits = 64;
  std::optional<Vector> level1_shift;  // added to the level-1 output before renormalizing
};

struct IterativeOutput {
  TimeSeries series;  // predictions labelled 1..k
  std::vector<double> probabilities;
  int total_qubits = 0;
};

IterativeOutput iterative_circuit(const BlockEncoding& be_W, const DataOracle& seed_oracle, int k_levels,
                                  const CircuitDims& dims, const IterativeOptions& opts = {});

/// δ_0 = δ_1 = delta_seed, δ_j = 3κ_W(δ_{j−1} + δ_{j−2}); returns δ_0..δ_k.
std::vector<double> error_propagation_bound(double delta_seed, double kappa_W, int k);

/// Total qubits of the k-level recursive circuit: w′ + d + 1 + k(d+3).
int iterative_qubits(const CircuitDims& dims, int k);

/// Random Hermitian toy dynamics on d qubits, normalized to unit spectral norm.
Hamiltonian toy_hamiltonian(int d, std::uint64_t seed);
TimeSeries toy_series(int d, std::int64_t count, double dt, std::uint64_t seed, std::int64_t first_index = 0);

}  // namespace qngrc
