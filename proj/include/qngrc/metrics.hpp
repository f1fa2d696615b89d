#pragma once

#include <string>
#include <vector>

#include "qngrc/quantum_dynamics.hpp"

namespace qngrc {

struct StepMetrics {
  std::int64_t step = 0;
  double fidelity = 0.0;
  double exp_X0 = 0.0;
  double exp_X0X1 = 0.0;
  double raw_norm = 0.0;
  double target_X0 = 0.0;
  double target_X0X1 = 0.0;
  double amp_err_raw = 0.0;
  double amp_err_aligned = 0.0;
};

/// Per-step metrics of predictions against targets (same length, same order).
std::vector<StepMetrics> evaluate_predictions(const std::vector<StateVector>& predicted,
                                              const std::vector<double>& raw_norms,
                                              const std::vector<StateVector>& targets,
                                              std::int64_t first_step = 0);

void write_metrics_csv(const std::string& path, const std::vector<StepMetrics>& rows);
std::vector<StepMetrics> read_metrics_csv(const std::string& path);

struct MetricsSummary {
  std::size_t steps = 0;
  double min_fidelity = 0.0;
  double mean_fidelity = 0.0;
  double final_fidelity = 0.0;
  double rms_X0 = 0.0;
  double rms_X0X1 = 0.0;
  double max_raw_norm_drift = 0.0;  // max |raw_norm − 1|
  double max_amp_err_raw = 0.0;
  double max_amp_err_aligned = 0.0;
};

MetricsSummary summarize(const std::vector<StepMetrics>& rows);

/// Moving average of the fidelity column with the given window (length n − w + 1).
std::vector<double> moving_average(const std::vector<double>& v, std::size_t window);

}  // namespace qngrc
