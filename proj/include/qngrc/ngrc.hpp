#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qngrc/quantum_dynamics.hpp"
#include "qngrc/types.hpp"

namespace qngrc {

enum class Layout { concatenated, padded };

std::string to_string(Layout l);
Layout layout_from_string(const std::string& s);

struct FeatureConfig {
  int m = 2;
  int p = 2;
  int delta = 1;
  std::int64_t tau = 1;
  double lambda = 0.0;

  void validate() const;
  /// Number of past steps a feature at index k reaches back: (m−1)Δ.
  std::int64_t history() const { return static_cast<std::int64_t>(m - 1) * delta; }
};

struct FeatureMatrix {
  Matrix columns;  // L×T
  Layout layout = Layout::concatenated;
  Eigen::Index state_dim = 0;
  std::int64_t first_index = 0;  // time label of column 0
};

/// Upper limit on feature-vector entries accepted by the builders.
inline constexpr std::uint64_t kFeatureBudget = std::uint64_t{1} << 26;

/// Feature length for state dimension D: mD + (mD)^p, or 2(mD)^p when padded.
std::uint64_t feature_length(Eigen::Index D, int m, int p, Layout layout,
                             std::uint64_t budget = kFeatureBudget);

StateVector delay_vector(const TimeSeries& series, std::int64_t k, int m, int delta);
Vector feature_vector(const Vector& o, int p, std::uint64_t budget = kFeatureBudget);

/// (1/√2)|0⟩|o⟩^{⊗p} + (1/√2)|1⟩|0⟩^{⊗(p−1)}|o⟩ for unit o.  The degree-p monomials
/// sit at [0, (mD)^p) scaled by 1/√2; the linear block at [(mD)^p, (mD)^p + mD).
Vector padded_feature_vector(const Vector& o, int p = 2, std::uint64_t budget = kFeatureBudget);

/// Reads the informative entries of a padded feature back as o ⊕ o^{⊗p}.
Vector unpad_feature(const Vector& padded, Eigen::Index o_len, int p);

/// Feature of time index k under the given layout (padded features use o/‖o‖).
Vector make_feature(const TimeSeries& series, std::int64_t k, const FeatureConfig& cfg, Layout layout);
Vector make_feature(const std::vector<StateVector>& newest_last, const FeatureConfig& cfg, Layout layout);

std::pair<FeatureMatrix, Matrix> assemble_training(const TimeSeries& series, const TimeSeries& targets,
                                                   const FeatureConfig& cfg, Layout layout);

struct NormBounds {
  double norm = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool holds() const { return lower <= norm * (1 + 1e-12) && norm <= upper * (1 + 1e-12); }
};

/// c_min/√T ≤ ‖A‖ ≤ c_max·√(rows)·√T, with c the column norms; for unit columns
/// this is 1/√T ≤ ‖A‖ ≤ √(rows·T).
NormBounds norm_bounds(const Matrix& A, double norm);

enum class RankPolicy { pseudoinverse, require_full_row_rank };

struct TrainOptions {
  RankPolicy rank_policy = RankPolicy::pseudoinverse;
  double rank_tol = 1e-12;  // relative to σ_max
};

struct WeightModel {
  Matrix W;
  FeatureConfig config;
  Layout layout = Layout::concatenated;
  Eigen::Index state_dim = 0;
  double kappa_X = 1.0;
  double kappa = 1.0;
  double kappa_W = 1.0;
  double norm_X = 0.0;
  double norm_Y = 0.0;
  double norm_W = 0.0;
  double sigma_min_X = 0.0;  // smallest retained singular value
  Eigen::Index rank_X = 0;
  Eigen::Index n_train = 0;
};

WeightModel train_weights(const FeatureMatrix& X, const Matrix& Y, const FeatureConfig& cfg,
                          const TrainOptions& opts = {});
/// Plain-matrix form (layout recorded as concatenated, config carries λ only).
WeightModel train_weights(const Matrix& X, const Matrix& Y, double lambda, const TrainOptions& opts = {});

double kappa_regularized(double kappa_X, double norm_X, double lambda);

struct Prediction {
  StateVector state;
  Vector raw;
  double raw_norm = 0.0;
};

Prediction predict_skip(const WeightModel& model, const Vector& feature);

struct RolloutResult {
  TimeSeries series;             // predictions labelled 1..n_steps after the seed
  std::vector<double> raw_norms;
};

/// seed is ordered oldest → newest and must hold at least (m−1)Δ+1 states.
RolloutResult predict_iterative(const WeightModel& model, const std::vector<StateVector>& seed,
                                std::uint64_t n_steps);

double fidelity(const StateVector& a, const StateVector& b);

enum class PauliAxis { X, Y, Z };
struct PauliTerm {
  int site;
  PauliAxis axis;
};
double pauli_expectation(const StateVector& s, const std::vector<PauliTerm>& ops);

/// max_i |a_i − b_i| without and with the global phase of ⟨a|b⟩ removed.
double amplitude_error(const StateVector& a, const StateVector& b);
double amplitude_error_aligned(const StateVector& a, const StateVector& b);

void save_model(const std::string& path, const WeightModel& model);
WeightModel load_model(const std::string& path);

}  // namespace qngrc
