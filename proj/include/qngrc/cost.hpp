#pragma once

#include <map>
#include <string>

#include <json.hpp>

namespace qngrc {

/// Query bookkeeping for one construction.  Counts are coefficients of the
/// oracle costs T_O (training data) and T_Õ (prediction data).
struct CostEstimate {
  std::string formula_id;
  std::string expression;
  double prefactor = 1.0;           // the O(·) factor multiplying the input cost
  double training_calls = 0.0;      // coefficient of T_O
  double prediction_calls = 0.0;    // coefficient of T_Õ
  std::map<std::string, double> scalars;  // κ, ‖X‖, ‖Y‖, λ, δ, T, D, ...

  /// Prefactor and call counts positive and finite; scalars finite and ≥ 0.
  bool valid() const;
  nlohmann::json to_json() const;
};

/// max(1, ln x): keeps logarithmic factors positive and monotone.
double log_factor(double x);

}  // namespace qngrc
