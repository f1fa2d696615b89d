#pragma once

#include <stdexcept>
#include <string>

namespace qngrc {

// Every error carries a short machine-readable kind so the CLI can emit it as JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& w) : Error("invalid_argument", w) {}
};
struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& w) : Error("dimension_mismatch", w) {}
};
struct IndexOutOfRange : Error {
  explicit IndexOutOfRange(const std::string& w) : Error("index_out_of_range", w) {}
};
struct IllConditioned : Error {
  explicit IllConditioned(const std::string& w) : Error("ill_conditioned", w) {}
};
struct DegeneratePrediction : Error {
  explicit DegeneratePrediction(const std::string& w) : Error("degenerate", w) {}
};
struct PreconditionViolated : Error {
  explicit PreconditionViolated(const std::string& w) : Error("precondition", w) {}
};
struct DomainViolation : Error {
  explicit DomainViolation(const std::string& w) : Error("domain_violation", w) {}
};
struct ResourceLimit : Error {
  explicit ResourceLimit(const std::string& w) : Error("resource_limit", w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error("io", w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error("config", w) {}
};
struct NumericalFailure : Error {
  explicit NumericalFailure(const std::string& w) : Error("numerical", w) {}
};

}  // namespace qngrc
