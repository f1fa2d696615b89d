#pragma once

#include <cstdint>

namespace qngrc {

struct CircuitDims {
  int d = 1;             // qubits per state
  std::int64_t D = 2;    // 2^d
  int t = 0;             // index-register qubits
  std::int64_t T = 1;    // training columns
  int w = 0;             // ancillas of the weight encoding
  int w_prime = 0;       // ancillas of the prediction circuit

  /// max(2d+3, t): width of the data and index registers of the encodings.
  int r() const { return (2 * d + 3) > t ? (2 * d + 3) : t; }
};

/// Fills every field from (d, t); T is set to 2^t.
CircuitDims ancilla_accounting(int d, int t);
/// Same with t = ⌈log₂ T⌉ and the given T.
CircuitDims circuit_dims(int d, std::int64_t T);

}  // namespace qngrc
