#include "qngrc/circuit.hpp"

#include <algorithm>
#include <set>

#include "qngrc/errors.hpp"

namespace qngrc {

namespace {

using Index = Eigen::Index;

Index bit_of(int qubit, int n) { return Index{1} << (n - 1 - qubit); }

// Basis index offset contributed by a bit pattern over the listed qubits (first = MSB).
Index scatter(Index value, const std::vector<int>& qs, int n) {
  Index out = 0;
  const int k = static_cast<int>(qs.size());
  for (int i = 0; i < k; ++i)
    if ((value >> (k - 1 - i)) & 1) out |= bit_of(qs[i], n);
  return out;
}

Index gather(Index basis, const std::vector<int>& qs, int n) {
  Index v = 0;
  for (int q : qs) v = (v << 1) | ((basis & bit_of(q, n)) ? 1 : 0);
  return v;
}

void check_qubits(const std::vector<int>& qs, int n) {
  for (int q : qs)
    if (q < 0 || q >= n) throw IndexOutOfRange("qubit " + std::to_string(q) + " outside a " + std::to_string(n) + "-qubit circuit");
}

}  // namespace

void apply_gate(const Gate& g, int n, Vector& state) {
  if (!g.swap_with.empty()) {
    Index mask = 0;
    for (std::size_t i = 0; i < g.targets.size(); ++i) mask |= bit_of(g.targets[i], n) | bit_of(g.swap_with[i], n);
    for (Index b = 0; b < state.size(); ++b) {
      bool ok = true;
      for (auto [q, v] : g.controls) ok = ok && (((b & bit_of(q, n)) != 0) == (v != 0));
      if (!ok) continue;
      Index s = b & ~mask;
      for (std::size_t i = 0; i < g.targets.size(); ++i) {
        if (b & bit_of(g.targets[i], n)) s |= bit_of(g.swap_with[i], n);
        if (b & bit_of(g.swap_with[i], n)) s |= bit_of(g.targets[i], n);
      }
      if (s > b) std::swap(state(b), state(s));
    }
    return;
  }
  const int k = static_cast<int>(g.targets.size());
  const Index sub = Index{1} << k;
  Index tmask = 0;
  for (int q : g.targets) tmask |= bit_of(q, n);
  std::vector<Index> offs(static_cast<std::size_t>(sub));
  for (Index v = 0; v < sub; ++v) offs[static_cast<std::size_t>(v)] = scatter(v, g.targets, n);
  Vector buf(sub), out(sub);
  for (Index b = 0; b < state.size(); ++b) {
    if (b & tmask) continue;
    bool ok = true;
    for (auto [q, v] : g.controls) ok = ok && (((b & bit_of(q, n)) != 0) == (v != 0));
    if (!ok) continue;
    const Matrix& M = g.matrices[g.select.empty() ? 0 : static_cast<std::size_t>(gather(b, g.select, n))];
    for (Index v = 0; v < sub; ++v) buf(v) = state(b | offs[static_cast<std::size_t>(v)]);
    out.noalias() = M * buf;
    for (Index v = 0; v < sub; ++v) state(b | offs[static_cast<std::size_t>(v)]) = out(v);
  }
}

Register Circuit::add_register(const std::string& name, int size) {
  if (size < 0) throw InvalidArgument("register size must be >= 0");
  for (const auto& r : registers_)
    if (r.name == name) throw InvalidArgument("duplicate register '" + name + "'");
  Register r{name, n_qubits_, size};
  n_qubits_ += size;
  registers_.push_back(r);
  return r;
}

const Register& Circuit::reg(const std::string& name) const {
  for (const auto& r : registers_)
    if (r.name == name) return r;
  throw InvalidArgument("unknown register '" + name + "'");
}

std::vector<int> Circuit::qubits(const std::string& name, int low) const {
  const Register& r = reg(name);
  const int take = low < 0 ? r.size : low;
  if (take > r.size) throw DimensionMismatch("register '" + name + "' has only " + std::to_string(r.size) + " qubits");
  std::vector<int> qs;
  for (int i = r.size - take; i < r.size; ++i) qs.push_back(r.offset + i);
  return qs;
}

void Circuit::append(Gate g) {
  check_qubits(g.targets, n_qubits_);
  check_qubits(g.select, n_qubits_);
  check_qubits(g.swap_with, n_qubits_);
  std::set<int> used(g.targets.begin(), g.targets.end());
  for (int q : g.select) used.insert(q);
  for (int q : g.swap_with) used.insert(q);
  for (auto [q, v] : g.controls) {
    check_qubits({q}, n_qubits_);
    used.insert(q);
  }
  const std::size_t total = g.targets.size() + g.select.size() + g.swap_with.size() + g.controls.size();
  if (used.size() != total) throw InvalidArgument("gate '" + g.kind + "' uses a qubit twice");
  if (!g.swap_with.empty()) {
    if (g.swap_with.size() != g.targets.size()) throw DimensionMismatch("SWAP halves differ in width");
  } else {
    const Index sub = Index{1} << g.targets.size();
    const std::size_t need = std::size_t{1} << g.select.size();
    if (g.matrices.size() != need) throw DimensionMismatch("gate '" + g.kind + "' needs " + std::to_string(need) + " matrices");
    for (const auto& M : g.matrices)
      if (M.rows() != sub || M.cols() != sub) throw DimensionMismatch("gate '" + g.kind + "' matrix size mismatch");
  }
  gates_.push_back(std::move(g));
}

void Circuit::apply_dense(const std::string& kind, const Matrix& m, const std::vector<int>& targets,
                          const std::string& block) {
  Gate g;
  g.kind = kind;
  g.block = block;
  g.matrices = {m};
  g.targets = targets;
  append(std::move(g));
}

void Circuit::swap_registers(const std::vector<int>& a, const std::vector<int>& b, const std::string& block) {
  Gate g;
  g.kind = "SWAP";
  g.block = block;
  g.targets = a;
  g.swap_with = b;
  append(std::move(g));
}

void Circuit::append_circuit(const Circuit& sub, const std::vector<int>& map, const std::string& block,
                             const std::vector<std::pair<int, int>>& extra_controls) {
  if (static_cast<int>(map.size()) != sub.n_qubits())
    throw DimensionMismatch("qubit map covers " + std::to_string(map.size()) + " of " +
                            std::to_string(sub.n_qubits()) + " qubits");
  auto remap = [&](std::vector<int>& qs) {
    for (int& q : qs) q = map[static_cast<std::size_t>(q)];
  };
  for (Gate g : sub.gates_) {
    remap(g.targets);
    remap(g.select);
    remap(g.swap_with);
    for (auto& c : g.controls) c.first = map[static_cast<std::size_t>(c.first)];
    g.controls.insert(g.controls.end(), extra_controls.begin(), extra_controls.end());
    g.block = g.block.empty() ? block : block + "/" + g.block;
    append(std::move(g));
  }
}

int Circuit::oracle_calls() const {
  int n = 0;
  for (const auto& g : gates_) n += g.oracle_calls;
  return n;
}

StateVector Circuit::apply(const StateVector& in) const {
  if (in.size() != dim()) throw DimensionMismatch("state dimension " + std::to_string(in.size()) + " vs circuit " + std::to_string(dim()));
  Vector s = in;
  for (const auto& g : gates_) apply_gate(g, n_qubits_, s);
  return s;
}

Matrix Circuit::apply_columns(const Matrix& in) const {
  Matrix out(in.rows(), in.cols());
  for (Index c = 0; c < in.cols(); ++c) out.col(c) = apply(in.col(c));
  return out;
}

Matrix Circuit::materialize() const {
  if (dim() > kMaxDenseDim)
    throw ResourceLimit("circuit on " + std::to_string(n_qubits_) + " qubits exceeds the dense limit of " +
                        std::to_string(kMaxDenseDim) + " amplitudes; reduce d or T");
  return apply_columns(Matrix::Identity(dim(), dim()));
}

nlohmann::json Circuit::to_json() const {
  nlohmann::json j;
  j["n_qubits"] = n_qubits_;
  j["registers"] = nlohmann::json::array();
  for (const auto& r : registers_) j["registers"].push_back({{"name", r.name}, {"offset", r.offset}, {"size", r.size}});
  // Consecutive gates sharing a block collapse into one entry.
  j["blocks"] = nlohmann::json::array();
  for (const auto& g : gates_) {
    const std::string name = g.block.empty() ? g.kind : g.block;
    auto& arr = j["blocks"];
    if (arr.empty() || arr.back()["name"] != name) {
      arr.push_back({{"name", name}, {"kinds", nlohmann::json::array()}, {"qubits", nlohmann::json::array()},
                     {"oracle_calls", 0}});
    }
    auto& e = arr.back();
    if (std::find(e["kinds"].begin(), e["kinds"].end(), g.kind) == e["kinds"].end()) e["kinds"].push_back(g.kind);
    std::set<int> qs(e["qubits"].begin(), e["qubits"].end());
    qs.insert(g.targets.begin(), g.targets.end());
    qs.insert(g.select.begin(), g.select.end());
    qs.insert(g.swap_with.begin(), g.swap_with.end());
    for (auto [q, v] : g.controls) qs.insert(q);
    e["qubits"] = std::vector<int>(qs.begin(), qs.end());
    e["oracle_calls"] = e["oracle_calls"].get<int>() + g.oracle_calls;
  }
  j["oracle_calls"] = oracle_calls();
  return j;
}

}  // namespace qngrc
