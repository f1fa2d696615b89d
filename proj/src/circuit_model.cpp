#include "qngrc/circuit_model.hpp"

#include <cmath>
#include <random>

#include "qngrc/errors.hpp"
#include "qngrc/linalg.hpp"

namespace qngrc {

namespace {

using Index = Eigen::Index;

constexpr int kFeatureQubitCap = 24;

std::vector<int> concat(std::vector<int> a, const std::vector<int>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Adjoint of a preparation of the uniform superposition over T of 2^t basis states.
// For T = 2^t this is the Hadamard layer; otherwise a real Householder reflection.
Matrix uniform_unprep(std::int64_t T, int t) {
  const Index n = Index{1} << t;
  if (T == n) return linalg::hadamard_layer(t);
  Vector u = Vector::Zero(n);
  u.head(T).setConstant(1.0 / std::sqrt(static_cast<double>(T)));
  Vector v = -u;
  v(0) += 1.0;
  const double vv = v.squaredNorm();
  Matrix Q = Matrix::Identity(n, n);
  if (vv > 0.0) Q -= (2.0 / vv) * v * v.adjoint();
  return Q;
}

void append_unprep(Circuit& c, const std::vector<int>& qs, std::int64_t T) {
  const int t = static_cast<int>(qs.size());
  if (t == 0) return;
  const bool hadamard = T == (std::int64_t{1} << t);
  c.apply_dense(hadamard ? "H-layer" : "G", uniform_unprep(T, t), qs, "G");
}

// Top-left 2^r×2^r block of a circuit on [A: r][B: r], read from the columns |0⟩_A|k⟩_B, k < 2^t.
Matrix extract_block(const Circuit& c, int r, int t) {
  const Index n = Index{1} << r;
  Matrix B = Matrix::Zero(n, n);
  for (Index k = 0; k < (Index{1} << t); ++k) {
    Vector in = Vector::Zero(c.dim());
    in(k) = 1.0;
    B.col(k) = c.apply(in).head(n);
  }
  return B;
}

void check_dims(const CircuitDims& dims) {
  if (dims.D != (std::int64_t{1} << dims.d)) throw DimensionMismatch("inconsistent dims: D != 2^d");
  if (dims.T < 1 || dims.T > (std::int64_t{1} << dims.t)) throw DimensionMismatch("inconsistent dims: T exceeds 2^t");
  if (2 * dims.r() > 26) throw ResourceLimit("encoding circuit on " + std::to_string(2 * dims.r()) + " qubits is too large to simulate; reduce d or T");
}

double nonzero_condition(const RealVector& s) {
  const Index r = linalg::numerical_rank(s, 1e-12);
  if (r == 0) return std::numeric_limits<double>::infinity();
  return s(0) / s(r - 1);
}

}  // namespace

CircuitDims ancilla_accounting(int d, int t) {
  if (d < 1) throw InvalidArgument("d must be >= 1");
  if (t < 0 || t > 62) throw InvalidArgument("t must lie in [0, 62]");
  CircuitDims c;
  c.d = d;
  c.D = std::int64_t{1} << d;
  c.t = t;
  c.T = std::int64_t{1} << t;
  c.w = 2 * c.r() + 2;
  c.w_prime = c.w + std::max(0, t - 2 * d - 3);
  return c;
}

CircuitDims circuit_dims(int d, std::int64_t T) {
  if (T < 1) throw InvalidArgument("T must be >= 1");
  CircuitDims c = ancilla_accounting(d, linalg::ceil_log2(static_cast<std::uint64_t>(T)));
  c.T = T;
  return c;
}

DataOracle::DataOracle(const TimeSeries& series, std::int64_t offset, std::int64_t T, std::uint64_t seed)
    : T_(T), offset_(offset), calls_(std::make_shared<std::atomic<long>>(0)) {
  if (T < 1) throw InvalidArgument("oracle needs T >= 1");
  if (series.size() == 0) throw InvalidArgument("oracle over an empty series");
  if (!linalg::is_pow2(static_cast<std::uint64_t>(series.dim()))) throw DimensionMismatch("state dimension is not a power of two");
  d_ = linalg::ilog2(static_cast<std::uint64_t>(series.dim()));
  t_ = linalg::ceil_log2(static_cast<std::uint64_t>(T));
  if (!series.covers(offset) || !series.covers(T - 1 + offset))
    throw IndexOutOfRange("oracle with offset " + std::to_string(offset) + " needs labels [" + std::to_string(offset) +
                          ", " + std::to_string(T - 1 + offset) + "], series covers [" +
                          std::to_string(series.first_index) + ", " + std::to_string(series.last_index()) + "]");
  const Index D = series.dim();
  blocks_.reserve(std::size_t{1} << t_);
  for (std::int64_t k = 0; k < (std::int64_t{1} << t_); ++k) {
    if (k >= T) {
      blocks_.push_back(Matrix::Identity(D, D));
      continue;
    }
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(k + 1)) ^
                        static_cast<std::uint64_t>(offset));
    Matrix q = series.at(k + offset);
    q /= q.norm();
    blocks_.push_back(linalg::complete_unitary(q, rng));
  }
}

StateVector DataOracle::column(std::int64_t k) const {
  if (k < 0 || k >= T_) throw IndexOutOfRange("oracle column " + std::to_string(k) + " outside [0, " + std::to_string(T_) + ")");
  return blocks_[static_cast<std::size_t>(k)].col(0);
}

Matrix DataOracle::unitary() const {
  const Index D = this->D();
  const Index n = Index{1} << t_;
  if (D * n > kMaxDenseDim) throw ResourceLimit("oracle unitary exceeds the dense limit; reduce d or T");
  Matrix U = Matrix::Zero(D * n, D * n);
  // basis index = data·2^t + k
  for (Index k = 0; k < n; ++k)
    for (Index a = 0; a < D; ++a)
      for (Index b = 0; b < D; ++b) U(a * n + k, b * n + k) = blocks_[static_cast<std::size_t>(k)](a, b);
  return U;
}

Gate DataOracle::gate(const std::vector<int>& data, const std::vector<int>& index) const {
  if (static_cast<int>(data.size()) != d_ || static_cast<int>(index.size()) != t_)
    throw DimensionMismatch("oracle needs " + std::to_string(d_) + " data and " + std::to_string(t_) + " index qubits");
  Gate g;
  g.kind = "oracle";
  g.matrices = blocks_;
  g.targets = data;
  g.select = index;
  g.oracle_calls = 1;
  ++*calls_;
  return g;
}

DataOracle oracle_from_series(const TimeSeries& series, std::int64_t offset, std::int64_t T, std::uint64_t seed) {
  return DataOracle(series, offset, T, seed);
}

Circuit build_u_lin(const std::vector<DataOracle>& oracles, int m) {
  if (m < 1 || !linalg::is_pow2(static_cast<std::uint64_t>(m))) throw InvalidArgument("m must be a power of two");
  if (static_cast<int>(oracles.size()) != m)
    throw DimensionMismatch("oracle-count mismatch: " + std::to_string(oracles.size()) + " oracles for m = " + std::to_string(m));
  const int d = oracles[0].d(), t = oracles[0].t();
  for (const auto& o : oracles)
    if (o.d() != d || o.t() != t) throw DimensionMismatch("oracles disagree on register widths");
  const int eta = linalg::ilog2(static_cast<std::uint64_t>(m));
  Circuit c;
  c.add_register("sel", eta);
  c.add_register("data", d);
  c.add_register("index", t);
  const auto data = c.qubits("data"), index = c.qubits("index");
  if (eta == 0) {
    c.append(oracles[0].gate(data, index));
    return c;
  }
  c.apply_dense("H-layer", linalg::hadamard_layer(eta), c.qubits("sel"));
  Gate sel;
  sel.kind = "SELECT";
  sel.targets = data;
  sel.select = concat(c.qubits("sel"), index);
  for (const auto& o : oracles) {
    Gate g = o.gate(data, index);
    sel.matrices.insert(sel.matrices.end(), g.matrices.begin(), g.matrices.end());
    sel.oracle_calls += g.oracle_calls;
  }
  c.append(std::move(sel));
  return c;
}

Circuit build_u_f(const Circuit& u_lin, int p) {
  if (p < 1) throw InvalidArgument("p must be >= 1");
  const int eta = u_lin.reg("sel").size, d = u_lin.reg("data").size, t = u_lin.reg("index").size;
  const int width = 1 + p * (eta + d);
  if (width + t > kFeatureQubitCap)
    throw ResourceLimit("feature encoder needs " + std::to_string(width + t) + " qubits, cap is " +
                        std::to_string(kFeatureQubitCap));
  Circuit c;
  c.add_register("ctrl", 1);
  for (int i = 0; i < p; ++i) c.add_register("copy_" + std::to_string(i + 1), eta + d);
  c.add_register("index", t);
  const int ctrl = c.qubits("ctrl")[0];
  c.apply_dense("H-layer", linalg::hadamard_layer(1), {ctrl}, "U^f");
  for (int i = 0; i < p; ++i) {
    const auto map = concat(c.qubits("copy_" + std::to_string(i + 1)), c.qubits("index"));
    // The last copy runs in both branches; the others only under ctrl = 0.
    std::vector<std::pair<int, int>> ctl;
    if (i + 1 < p) ctl.push_back({ctrl, 0});
    c.append_circuit(u_lin, map, "U^f/U^lin", ctl);
  }
  return c;
}

int feature_width(const Circuit& u_f) { return u_f.n_qubits() - u_f.reg("index").size; }

Vector feature_state(const Circuit& u_f, std::int64_t k) {
  const int t = u_f.reg("index").size;
  if (k < 0 || k >= (std::int64_t{1} << t)) throw IndexOutOfRange("index " + std::to_string(k) + " outside the index register");
  Vector in = Vector::Zero(u_f.dim());
  in(k) = 1.0;
  const Vector out = u_f.apply(in);
  const Index L = Index{1} << feature_width(u_f);
  Vector x(L);
  for (Index f = 0; f < L; ++f) x(f) = out((f << t) | k);
  if (std::abs(x.squaredNorm() - 1.0) > 1e-10) throw NumericalFailure("feature encoder leaked amplitude off the index register");
  return x;
}

Circuit feature_encoding_circuit(const Circuit& u_f, const CircuitDims& dims) {
  check_dims(dims);
  const int r = dims.r(), f = feature_width(u_f), t = u_f.reg("index").size;
  if (t != dims.t) throw DimensionMismatch("U^f index register has " + std::to_string(t) + " qubits, dims say t = " + std::to_string(dims.t));
  if (f > r) throw DimensionMismatch("U^f feature register (" + std::to_string(f) + " qubits) exceeds max(2d+3,t) = " + std::to_string(r));
  Circuit c;
  c.add_register("A", r);
  c.add_register("B", r);
  c.append_circuit(u_f, concat(c.qubits("A", f), c.qubits("B", t)), "U^f");
  c.swap_registers(c.qubits("A"), c.qubits("B"), "SWAP");
  append_unprep(c, c.qubits("A", t), dims.T);
  return c;
}

Circuit target_encoding_circuit(const DataOracle& oracle_tau, const CircuitDims& dims) {
  check_dims(dims);
  if (oracle_tau.d() != dims.d || oracle_tau.t() != dims.t || oracle_tau.T() < dims.T)
    throw DimensionMismatch("target oracle does not match the circuit dims");
  const int r = dims.r();
  Circuit c;
  c.add_register("A", r);
  c.add_register("B", r);
  Gate g = oracle_tau.gate(c.qubits("A", dims.d), c.qubits("B", dims.t));
  g.block = "O_tau";
  c.append(std::move(g));
  c.swap_registers(c.qubits("A"), c.qubits("B"), "SWAP");
  append_unprep(c, c.qubits("A", dims.t), dims.T);
  return c;
}

BlockEncoding feature_block_encoding(const Circuit& u_f, const CircuitDims& dims) {
  const Circuit c = feature_encoding_circuit(u_f, dims);
  const double sqrtT = std::sqrt(static_cast<double>(dims.T));
  const Matrix X = sqrtT * extract_block(c, dims.r(), dims.t);
  BlockEncoding be = embed(X, sqrtT);
  be.n_ancilla = dims.r();
  be.epsilon = 0.0;
  be.block_rows = Index{1} << feature_width(u_f);
  be.block_cols = dims.T;
  be.cost = u_f.oracle_calls();
  return be;
}

BlockEncoding feature_block_encoding_dense(const Circuit& u_f, const CircuitDims& dims) {
  const Circuit c = feature_encoding_circuit(u_f, dims);
  BlockEncoding be;
  be.unitary = c.materialize();
  be.alpha = std::sqrt(static_cast<double>(dims.T));
  be.n_ancilla = dims.r();
  be.realized_ancillas = dims.r();
  be.block_rows = Index{1} << feature_width(u_f);
  be.block_cols = dims.T;
  be.cost = u_f.oracle_calls();
  return be;
}

BlockEncoding target_block_encoding(const DataOracle& oracle_tau, const CircuitDims& dims, double delta_Y) {
  const Circuit c = target_encoding_circuit(oracle_tau, dims);
  const double sqrtT = std::sqrt(static_cast<double>(dims.T));
  const Matrix Yb = sqrtT * extract_block(c, dims.r(), dims.t);
  BlockEncoding be = embed(Yb, sqrtT);
  be.n_ancilla = dims.r();
  be.epsilon = 0.0;
  be.block_rows = dims.D;
  be.block_cols = dims.T;
  be.cost = 1.0;
  Matrix Y(dims.D, dims.T);
  for (std::int64_t k = 0; k < dims.T; ++k) Y.col(k) = oracle_tau.column(k);
  return preamplify(be, Y, delta_Y).first;
}

PredictionOutput prediction_circuit(const BlockEncoding& be_W, const std::vector<DataOracle>& oracles_tilde,
                                    const CircuitDims& dims, double delta, int p) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("delta must lie in (0, 1]");
  if (oracles_tilde.empty()) throw InvalidArgument("prediction needs data oracles");
  if (oracles_tilde[0].d() != dims.d) throw DimensionMismatch("prediction oracles do not match d");
  PredictionOutput out;
  const RealVector sw = linalg::singular_values(be_W.encoded());
  out.norm_W = sw.size() ? sw(0) : 0.0;
  out.kappa_W = nonzero_condition(sw);
  if (!(out.norm_W > 0.0)) throw DegeneratePrediction("weight encoding is numerically zero");
  const double bound = delta * out.norm_W / (4.0 * out.kappa_W);
  if (be_W.epsilon > bound)
    throw PreconditionViolated("prediction requires delta_W <= delta*||W||/(4 kappa_W) = " + std::to_string(bound) +
                               ", got " + std::to_string(be_W.epsilon));

  const int m = static_cast<int>(oracles_tilde.size());
  const Circuit u_f = build_u_f(build_u_lin(oracles_tilde, m), p);
  for (std::int64_t k = 0; k < oracles_tilde[0].T(); ++k) {
    Vector x = feature_state(u_f, k);
    PostSelected ps = apply_to_state(be_W, x);
    out.states.push_back(std::move(ps.state));
    out.probabilities.push_back(ps.probability);
    out.features.push_back(std::move(x));
  }

  CostEstimate& c = out.cost;
  c.formula_id = "prediction_phase";
  c.expression = "O(kappa_W (alpha_W/||W||) log(kappa_W/delta) T_W + kappa_W T_O~)";
  c.prefactor = out.kappa_W * (be_W.alpha / out.norm_W) * log_factor(out.kappa_W / delta);
  c.training_calls = c.prefactor * be_W.cost;
  c.prediction_calls = out.kappa_W * u_f.oracle_calls();
  c.scalars = {{"kappa_W", out.kappa_W}, {"norm_W", out.norm_W}, {"alpha_W", be_W.alpha},
               {"delta", delta},          {"T_W", be_W.cost},     {"d", static_cast<double>(dims.d)}};
  return out;
}

int iterative_qubits(const CircuitDims& dims, int k) { return dims.w_prime + dims.d + 1 + k * (dims.d + 3); }

IterativeOutput iterative_circuit(const BlockEncoding& be_W, const DataOracle& seed_oracle, int k_levels,
                                  const CircuitDims& dims, const IterativeOptions& opts) {
  if (k_levels < 1) throw InvalidArgument("k_levels must be >= 1");
  IterativeOutput out;
  out.total_qubits = iterative_qubits(dims, k_levels);
  if (out.total_qubits > opts.max_qubits)
    throw ResourceLimit("recursive circuit for k = " + std::to_string(k_levels) + " needs " +
                        std::to_string(out.total_qubits) + " qubits, budget is " + std::to_string(opts.max_qubits));
  const std::int64_t need = static_cast<std::int64_t>(opts.m - 1) * opts.delta + 1;
  if (seed_oracle.T() < need) throw IndexOutOfRange("seed oracle holds " + std::to_string(seed_oracle.T()) + " states, need " + std::to_string(need));
  if (opts.level1_shift && opts.level1_shift->size() != seed_oracle.D()) throw DimensionMismatch("perturbation size mismatch");

  // history: oldest → newest
  std::vector<StateVector> hist;
  for (std::int64_t i = need - 1; i >= 0; --i) hist.push_back(seed_oracle.column(seed_oracle.T() - 1 - i));

  out.series.n_qubits = seed_oracle.d();
  out.series.first_index = 1;
  out.series.origin = "iterative_circuit";
  for (int level = 1; level <= k_levels; ++level) {
    // Each level reloads its (m−1)Δ+1 most recent states through fresh single-index oracles.
    TimeSeries window;
    window.states.assign(hist.end() - need, hist.end());
    std::vector<DataOracle> ors;
    for (int j = 0; j < opts.m; ++j)
      ors.emplace_back(window, need - 1 - static_cast<std::int64_t>(j) * opts.delta, 1);
    const Circuit u_f = build_u_f(build_u_lin(ors, opts.m), opts.p);
    PostSelected ps = apply_to_state(be_W, feature_state(u_f, 0));
    StateVector s = std::move(ps.state);
    if (level == 1 && opts.level1_shift) {
      s += *opts.level1_shift;
      const double n = s.norm();
      if (!(n > 0.0)) throw DegeneratePrediction("perturbed level-1 state vanished");
      s /= n;
    }
    out.probabilities.push_back(ps.probability);
    out.series.states.push_back(s);
    hist.push_back(std::move(s));
  }
  return out;
}

std::vector<double> error_propagation_bound(double delta_seed, double kappa_W, int k) {
  if (k < 0) throw InvalidArgument("k must be >= 0");
  std::vector<double> d(static_cast<std::size_t>(k + 1));
  for (int j = 0; j <= k; ++j) {
    const auto i = static_cast<std::size_t>(j);
    d[i] = j < 2 ? delta_seed : 3.0 * kappa_W * (d[i - 1] + d[i - 2]);
  }
  return d;
}

Hamiltonian toy_hamiltonian(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Index D = Index{1} << d;
  const Matrix A = linalg::random_matrix(D, D, rng);
  Matrix H = 0.5 * (A + A.adjoint());
  H /= linalg::spectral_norm(H);
  return Hamiltonian(d, H, "toy");
}

TimeSeries toy_series(int d, std::int64_t count, double dt, std::uint64_t seed, std::int64_t first_index) {
  if (count < 1) throw InvalidArgument("toy series needs count >= 1");
  const Hamiltonian H = toy_hamiltonian(d, seed);
  std::mt19937_64 rng(seed + 1);
  const StateVector s0 = linalg::random_state(H.dim(), rng);
  TimeSeries ts = evolve_series(propagator(H, dt), s0, static_cast<std::uint64_t>(count), 0);
  ts.first_index = first_index;
  ts.n_qubits = d;
  ts.origin = "toy";
  return ts;
}

}  // namespace qngrc
