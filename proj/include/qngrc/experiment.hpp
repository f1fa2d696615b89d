#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qngrc/ngrc.hpp"

namespace qngrc {

struct SystemConfig {
  int n_qubits = 4;
  double J = 0.5;
  double h = 5.0;
  double dt_divisor = 200.0;      // Δt = 1/(divisor·E_max) unless dt is given
  std::optional<double> dt;
};

struct TrainingConfig {
  std::int64_t T = 2000;
  std::int64_t tau = 10000;
  int m = 2;
  int p = 2;
  int delta = 1;
  double lambda = 0.0;
  std::uint64_t burn_in = 10000;
  Layout layout = Layout::concatenated;
};

struct PredictionConfig {
  std::int64_t T = 2000;
  std::string mode = "skip";      // skip | iterative
  std::uint64_t gap = 0;          // extra steps between the training window and the prediction inputs
};

struct QuantumConfig {
  bool enable = false;
  int d = 1;
  std::int64_t T = 4;
  double delta_W = 1e-2;
  double delta = 1e-2;
  double lambda = 0.1;
  std::int64_t tau = 1;
  double dt = 1.0;               // one inverse spectral norm of the unit-norm toy Hamiltonian
};

struct ExperimentConfig {
  std::string profile = "ci";
  SystemConfig system;
  TrainingConfig training;
  PredictionConfig prediction;
  QuantumConfig quantum;
  std::string out = "out";
  std::uint64_t seed = 7;

  /// Rejects every parameter that would violate a downstream precondition.
  void validate() const;
  nlohmann::json to_json() const;
  FeatureConfig feature_config() const;
};

ExperimentConfig profile_config(const std::string& profile);
/// Applies a JSON tree on top of `base`; unknown keys are rejected with their path.
ExperimentConfig apply_config_json(ExperimentConfig base, const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path, const std::string& profile);

/// Absolute evolution step of the first prediction input: training burn-in + T + gap.
std::uint64_t prediction_start(const ExperimentConfig& cfg);

struct GeneratedData {
  TimeSeries train_inputs;    // labels [−(m−1)Δ, T−1]
  TimeSeries train_targets;   // labels [τ, T−1+τ]
  TimeSeries predict_inputs;  // labels [−(m−1)Δ, T̃−1]
  TimeSeries predict_targets; // labels [τ, T̃−1+τ]
};

GeneratedData generate_data(const ExperimentConfig& cfg);

void cmd_generate(const ExperimentConfig& cfg, const std::string& out_dir);
WeightModel cmd_train(const ExperimentConfig& cfg, const std::string& out_dir);
nlohmann::json cmd_predict(const ExperimentConfig& cfg, const std::string& out_dir);
nlohmann::json cmd_verify_quantum(const ExperimentConfig& cfg, const std::string& out_dir);
nlohmann::json cmd_report(const std::vector<std::string>& metric_files, const std::string& out_path);

/// Skip or iterative predictions for already generated data.
struct PredictionRun {
  TimeSeries predicted;
  std::vector<double> raw_norms;
  std::vector<StateVector> targets;
};
PredictionRun run_prediction(const WeightModel& model, const GeneratedData& data, const std::string& mode,
                             std::int64_t n_steps);

}  // namespace qngrc
