#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qngrc/types.hpp"

namespace qngrc {

/// Largest Hilbert-space dimension a circuit may be materialized into.
inline constexpr Eigen::Index kMaxDenseDim = Eigen::Index{1} << 14;

struct Register {
  std::string name;
  int offset = 0;  // qubit 0 is the most significant bit of a basis index
  int size = 0;
};

/// One named block.  When `select` is non-empty the gate is multiplexed: the value
/// of the select qubits (first listed = most significant) picks matrices[value].
/// `swap_with` turns the gate into a qubit-wise register exchange.
struct Gate {
  std::string kind;  // H-layer, SELECT, SWAP, oracle, G, U_W, ...
  std::string block; // enclosing named block (U^lin, U^f, ...), may be empty
  std::vector<Matrix> matrices;
  std::vector<int> targets;
  std::vector<int> select;
  std::vector<std::pair<int, int>> controls;  // (qubit, required bit)
  std::vector<int> swap_with;
  int oracle_calls = 0;
};

class Circuit {
 public:
  explicit Circuit(int n_qubits = 0) : n_qubits_(n_qubits) {}

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return Eigen::Index{1} << n_qubits_; }

  /// Appends a register of fresh qubits and returns it.
  Register add_register(const std::string& name, int size);
  const Register& reg(const std::string& name) const;
  const std::vector<Register>& registers() const { return registers_; }
  /// Qubit positions of a register, optionally only its `low` least significant ones.
  std::vector<int> qubits(const std::string& name, int low = -1) const;

  void append(Gate g);
  void apply_dense(const std::string& kind, const Matrix& m, const std::vector<int>& targets,
                   const std::string& block = {});
  void swap_registers(const std::vector<int>& a, const std::vector<int>& b, const std::string& block = {});
  /// Inlines `sub` with its qubit i placed on map[i]; every gate gains `extra_controls`.
  void append_circuit(const Circuit& sub, const std::vector<int>& map, const std::string& block,
                      const std::vector<std::pair<int, int>>& extra_controls = {});

  const std::vector<Gate>& gates() const { return gates_; }
  int oracle_calls() const;

  StateVector apply(const StateVector& in) const;
  Matrix apply_columns(const Matrix& in) const;
  /// Dense unitary; throws ResourceLimit above kMaxDenseDim.
  Matrix materialize() const;

  nlohmann::json to_json() const;

 private:
  int n_qubits_ = 0;
  std::vector<Register> registers_;
  std::vector<Gate> gates_;
};

/// Simulates one gate in place on a state of the given qubit count.
void apply_gate(const Gate& g, int n_qubits, Vector& state);

}  // namespace qngrc
