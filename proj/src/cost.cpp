#include "qngrc/cost.hpp"

#include <cmath>

namespace qngrc {

double log_factor(double x) { return x > std::exp(1.0) ? std::log(x) : 1.0; }

bool CostEstimate::valid() const {
  auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!pos(prefactor)) return false;
  if (!std::isfinite(training_calls) || training_calls < 0.0) return false;
  if (!std::isfinite(prediction_calls) || prediction_calls < 0.0) return false;
  if (training_calls + prediction_calls <= 0.0) return false;
  for (const auto& [k, v] : scalars)
    if (!std::isfinite(v) || v < 0.0) return false;
  return true;
}

nlohmann::json CostEstimate::to_json() const {
  nlohmann::json j;
  j["formula_id"] = formula_id;
  j["expression"] = expression;
  j["prefactor"] = prefactor;
  j["oracle_calls"] = {{"T_O", training_calls}, {"T_O_tilde", prediction_calls}};
  j["scalars"] = scalars;
  return j;
}

}  // namespace qngrc
