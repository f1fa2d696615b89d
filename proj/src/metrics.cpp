#include "qngrc/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qngrc/errors.hpp"
#include "qngrc/io.hpp"
#include "qngrc/ngrc.hpp"

namespace qngrc {

namespace {
constexpr const char* kHeader =
    "step,fidelity,exp_X0,exp_X0X1,raw_norm,target_X0,target_X0X1,amp_err_raw,amp_err_aligned";
}

std::vector<StepMetrics> evaluate_predictions(const std::vector<StateVector>& predicted,
                                              const std::vector<double>& raw_norms,
                                              const std::vector<StateVector>& targets, std::int64_t first_step) {
  if (predicted.size() != targets.size() || raw_norms.size() != predicted.size())
    throw DimensionMismatch("predictions, raw norms and targets differ in length");
  const std::vector<PauliTerm> x0{{0, PauliAxis::X}};
  const std::vector<PauliTerm> x0x1{{0, PauliAxis::X}, {1, PauliAxis::X}};
  std::vector<StepMetrics> out(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& a = predicted[i];
    const auto& b = targets[i];
    auto& r = out[i];
    r.step = first_step + static_cast<std::int64_t>(i);
    r.fidelity = fidelity(a, b);
    r.exp_X0 = pauli_expectation(a, x0);
    r.exp_X0X1 = pauli_expectation(a, x0x1);
    r.raw_norm = raw_norms[i];
    r.target_X0 = pauli_expectation(b, x0);
    r.target_X0X1 = pauli_expectation(b, x0x1);
    r.amp_err_raw = amplitude_error(a, b);
    r.amp_err_aligned = amplitude_error_aligned(a, b);
  }
  return out;
}

void write_metrics_csv(const std::string& path, const std::vector<StepMetrics>& rows) {
  std::string text = std::string(kHeader) + "\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(r.step), r.fidelity, r.exp_X0, r.exp_X0X1, r.raw_norm, r.target_X0,
                  r.target_X0X1, r.amp_err_raw, r.amp_err_aligned);
    text += buf;
  }
  io::write_text_atomically(path, text);
}

std::vector<StepMetrics> read_metrics_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw IoError(path + ": empty metrics file");
  if (line.rfind("step,fidelity,exp_X0,exp_X0X1,raw_norm", 0) != 0) throw IoError(path + ": unexpected CSV header");
  const bool extended = line == kHeader;
  std::vector<StepMetrics> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        v.push_back(std::stod(cell, &pos));
        if (pos != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (v.size() != (extended ? 9u : 5u)) throw IoError(path + ":" + std::to_string(lineno) + ": wrong column count");
    StepMetrics r;
    r.step = static_cast<std::int64_t>(v[0]);
    r.fidelity = v[1];
    r.exp_X0 = v[2];
    r.exp_X0X1 = v[3];
    r.raw_norm = v[4];
    if (extended) {
      r.target_X0 = v[5];
      r.target_X0X1 = v[6];
      r.amp_err_raw = v[7];
      r.amp_err_aligned = v[8];
    }
    rows.push_back(r);
  }
  return rows;
}

MetricsSummary summarize(const std::vector<StepMetrics>& rows) {
  MetricsSummary s;
  s.steps = rows.size();
  if (rows.empty()) throw InvalidArgument("no metric rows to summarize");
  s.min_fidelity = rows.front().fidelity;
  double sum = 0.0, e0 = 0.0, e01 = 0.0;
  for (const auto& r : rows) {
    s.min_fidelity = std::min(s.min_fidelity, r.fidelity);
    sum += r.fidelity;
    e0 += (r.exp_X0 - r.target_X0) * (r.exp_X0 - r.target_X0);
    e01 += (r.exp_X0X1 - r.target_X0X1) * (r.exp_X0X1 - r.target_X0X1);
    s.max_raw_norm_drift = std::max(s.max_raw_norm_drift, std::abs(r.raw_norm - 1.0));
    s.max_amp_err_raw = std::max(s.max_amp_err_raw, r.amp_err_raw);
    s.max_amp_err_aligned = std::max(s.max_amp_err_aligned, r.amp_err_aligned);
  }
  const double n = static_cast<double>(rows.size());
  s.mean_fidelity = sum / n;
  s.final_fidelity = rows.back().fidelity;
  s.rms_X0 = std::sqrt(e0 / n);
  s.rms_X0X1 = std::sqrt(e01 / n);
  return s;
}

std::vector<double> moving_average(const std::vector<double>& v, std::size_t window) {
  if (window == 0) throw InvalidArgument("moving-average window must be positive");
  std::vector<double> out;
  if (v.size() < window) return out;
  // Each window is summed afresh so no running-sum drift leaks between windows.
  for (std::size_t i = 0; i + window <= v.size(); ++i)
    out.push_back(std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(i),
                                  v.begin() + static_cast<std::ptrdiff_t>(i + window), 0.0) /
                  static_cast<double>(window));
  return out;
}

}  // namespace qngrc
