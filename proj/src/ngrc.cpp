#include "qngrc/ngrc.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "qngrc/errors.hpp"
#include "qngrc/linalg.hpp"

namespace qngrc {

std::string to_string(Layout l) { return l == Layout::padded ? "padded" : "concatenated"; }

Layout layout_from_string(const std::string& s) {
  if (s == "padded") return Layout::padded;
  if (s == "concatenated") return Layout::concatenated;
  throw InvalidArgument("unknown feature layout '" + s + "'");
}

void FeatureConfig::validate() const {
  if (m < 1) throw InvalidArgument("m must be >= 1");
  if (p < 1) throw InvalidArgument("p must be >= 1");
  if (delta < 1) throw InvalidArgument("delta must be >= 1");
  if (tau < 1) throw InvalidArgument("tau must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
}

std::uint64_t feature_length(Eigen::Index D, int m, int p, Layout layout, std::uint64_t budget) {
  if (D < 1 || m < 1 || p < 1) throw InvalidArgument("feature length needs D, m, p >= 1");
  const std::uint64_t base = static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(D);
  std::uint64_t pw = 1;
  for (int i = 0; i < p; ++i) {
    if (pw > budget / base)
      throw ResourceLimit("(mD)^p = " + std::to_string(base) + "^" + std::to_string(p) +
                          " exceeds the feature budget of " + std::to_string(budget) + " entries");
    pw *= base;
  }
  std::uint64_t len = layout == Layout::padded ? 2 * pw : base + pw;
  if (len > budget) throw ResourceLimit("feature length " + std::to_string(len) + " exceeds budget");
  return len;
}

StateVector delay_vector(const TimeSeries& series, std::int64_t k, int m, int delta) {
  if (m < 1 || delta < 1) throw InvalidArgument("delay vector needs m, delta >= 1");
  const std::int64_t oldest = k - static_cast<std::int64_t>(m - 1) * delta;
  if (!series.covers(oldest) || !series.covers(k))
    throw IndexOutOfRange("delay history for index " + std::to_string(k) + " needs labels [" +
                          std::to_string(oldest) + ", " + std::to_string(k) + "]");
  const Eigen::Index D = series.dim();
  StateVector o(m * D);
  for (int j = 0; j < m; ++j) o.segment(j * D, D) = series.at(k - static_cast<std::int64_t>(j) * delta);
  return o;
}

namespace {

Vector tensor_power(const Vector& o, int p) {
  Vector acc = o;
  for (int i = 1; i < p; ++i) {
    Vector next(acc.size() * o.size());
    for (Eigen::Index a = 0; a < acc.size(); ++a) next.segment(a * o.size(), o.size()) = acc(a) * o;
    acc = std::move(next);
  }
  return acc;
}

}  // namespace

Vector feature_vector(const Vector& o, int p, std::uint64_t budget) {
  if (p < 1) throw InvalidArgument("p must be >= 1");
  if (o.size() == 0) throw InvalidArgument("empty delay vector");
  const auto len = feature_length(o.size(), 1, p, Layout::concatenated, budget);
  Vector x(static_cast<Eigen::Index>(len));
  x.head(o.size()) = o;
  x.tail(static_cast<Eigen::Index>(len) - o.size()) = tensor_power(o, p);
  return x;
}

Vector padded_feature_vector(const Vector& o, int p, std::uint64_t budget) {
  if (p < 1) throw InvalidArgument("p must be >= 1");
  if (std::abs(o.norm() - 1.0) > 1e-10) throw InvalidArgument("padded feature needs a unit-norm delay vector");
  const auto len = feature_length(o.size(), 1, p, Layout::padded, budget);
  const Eigen::Index half = static_cast<Eigen::Index>(len / 2);
  const double r = std::sqrt(0.5);
  Vector x = Vector::Zero(static_cast<Eigen::Index>(len));
  x.head(half) = r * tensor_power(o, p);
  x.segment(half, o.size()) = r * o;
  return x;
}

Vector unpad_feature(const Vector& padded, Eigen::Index o_len, int p) {
  const auto len = feature_length(o_len, 1, p, Layout::padded);
  if (static_cast<std::uint64_t>(padded.size()) != len) throw DimensionMismatch("padded feature length mismatch");
  const Eigen::Index half = static_cast<Eigen::Index>(len / 2);
  Vector x(o_len + half);
  x.head(o_len) = std::sqrt(2.0) * padded.segment(half, o_len);
  x.tail(half) = std::sqrt(2.0) * padded.head(half);
  return x;
}

namespace {

Vector feature_from_delay(const Vector& o, const FeatureConfig& cfg, Layout layout) {
  if (layout == Layout::concatenated) return feature_vector(o, cfg.p);
  const double n = o.norm();
  if (n == 0.0) throw DegeneratePrediction("zero delay vector cannot be normalized");
  return padded_feature_vector(o / n, cfg.p);
}

}  // namespace

Vector make_feature(const TimeSeries& series, std::int64_t k, const FeatureConfig& cfg, Layout layout) {
  return feature_from_delay(delay_vector(series, k, cfg.m, cfg.delta), cfg, layout);
}

Vector make_feature(const std::vector<StateVector>& newest_last, const FeatureConfig& cfg, Layout layout) {
  const auto need = static_cast<std::size_t>(cfg.history() + 1);
  if (newest_last.size() < need)
    throw IndexOutOfRange("feature needs " + std::to_string(need) + " history states, got " +
                          std::to_string(newest_last.size()));
  const Eigen::Index D = newest_last.back().size();
  Vector o(cfg.m * D);
  const std::size_t last = newest_last.size() - 1;
  for (int j = 0; j < cfg.m; ++j) o.segment(j * D, D) = newest_last[last - static_cast<std::size_t>(j) * cfg.delta];
  return feature_from_delay(o, cfg, layout);
}

std::pair<FeatureMatrix, Matrix> assemble_training(const TimeSeries& series, const TimeSeries& targets,
                                                   const FeatureConfig& cfg, Layout layout) {
  cfg.validate();
  if (series.size() == 0) throw InvalidArgument("empty training series");
  if (targets.dim() != series.dim() && targets.size() > 0)
    throw DimensionMismatch("series and targets differ in state dimension");
  const std::int64_t k0 = series.first_index + cfg.history();
  const std::int64_t k1 = series.last_index();
  if (k1 < k0) throw IndexOutOfRange("series too short for the delay history");
  const std::int64_t T = k1 - k0 + 1;
  if (!targets.covers(k0 + cfg.tau) || !targets.covers(k1 + cfg.tau))
    throw DimensionMismatch("length mismatch: targets must cover labels [" + std::to_string(k0 + cfg.tau) + ", " +
                            std::to_string(k1 + cfg.tau) + "], have [" + std::to_string(targets.first_index) +
                            ", " + std::to_string(targets.last_index()) + "]");
  const Eigen::Index D = series.dim();
  const auto L = static_cast<Eigen::Index>(feature_length(D, cfg.m, cfg.p, layout));
  FeatureMatrix X;
  X.layout = layout;
  X.state_dim = D;
  X.first_index = k0;
  X.columns.resize(L, T);
  Matrix Y(D, T);
  for (std::int64_t c = 0; c < T; ++c) {
    X.columns.col(c) = make_feature(series, k0 + c, cfg, layout);
    Y.col(c) = targets.at(k0 + c + cfg.tau);
  }
  return {std::move(X), std::move(Y)};
}

NormBounds norm_bounds(const Matrix& A, double norm) {
  NormBounds b;
  b.norm = norm;
  if (A.cols() == 0) return b;
  RealVector cn = A.colwise().norm().transpose();
  const double T = static_cast<double>(A.cols());
  b.lower = cn.minCoeff() / std::sqrt(T);
  b.upper = cn.maxCoeff() * std::sqrt(static_cast<double>(A.rows())) * std::sqrt(T);
  return b;
}

double kappa_regularized(double kappa_X, double norm_X, double lambda) {
  if (!(kappa_X >= 1.0)) throw InvalidArgument("kappa_X must be >= 1");
  if (!(norm_X > 0.0)) throw InvalidArgument("norm_X must be > 0");
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
  const double n2 = norm_X * norm_X;
  return kappa_X * std::sqrt((n2 + lambda) / (n2 + lambda * kappa_X * kappa_X));
}

namespace {

double gram_norm(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Matrix G = A.rows() <= A.cols() ? Matrix(A * A.adjoint()) : Matrix(A.adjoint() * A);
  Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace

WeightModel train_weights(const FeatureMatrix& X, const Matrix& Y, const FeatureConfig& cfg,
                          const TrainOptions& opts) {
  cfg.validate();
  WeightModel model = train_weights(X.columns, Y, cfg.lambda, opts);
  model.config = cfg;
  model.layout = X.layout;
  model.state_dim = X.state_dim;
  return model;
}

WeightModel train_weights(const Matrix& X, const Matrix& Y, double lambda, const TrainOptions& opts) {
  if (X.cols() != Y.cols())
    throw DimensionMismatch("X has " + std::to_string(X.cols()) + " columns, Y has " + std::to_string(Y.cols()));
  if (X.cols() == 0) throw InvalidArgument("no training columns");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
  if (!X.allFinite() || !Y.allFinite()) throw InvalidArgument("non-finite training data");

  linalg::WideSvd svd(X);
  const RealVector& s = svd.sigma();
  const Eigen::Index rank = linalg::numerical_rank(s, opts.rank_tol);
  if (rank == 0) throw IllConditioned("feature matrix is numerically zero (largest singular value " +
                                      std::to_string(s.size() ? s(0) : 0.0) + ")");
  const double smin = s(rank - 1);
  if (lambda == 0.0 && opts.rank_policy == RankPolicy::require_full_row_rank && rank < X.rows()) {
    const double smallest = X.rows() <= s.size() ? s(X.rows() - 1) : 0.0;
    throw IllConditioned("XX^dagger is singular with lambda = 0: smallest singular value of X is " +
                         std::to_string(smallest) + " (numerical rank " + std::to_string(rank) + " of " +
                         std::to_string(X.rows()) + " rows)");
  }

  RealVector f = RealVector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (lambda > 0.0)
      f(i) = s(i) / (s(i) * s(i) + lambda);
    else if (i < rank)
      f(i) = 1.0 / s(i);
  }
  Matrix YV = svd.times_V(Y);
  WeightModel m;
  m.W = YV * f.asDiagonal() * svd.U().adjoint();
  m.config.lambda = lambda;
  m.state_dim = Y.rows();
  m.n_train = X.cols();
  m.rank_X = rank;
  m.sigma_min_X = smin;
  m.norm_X = s(0);
  m.kappa_X = s(0) / smin;
  m.kappa = kappa_regularized(m.kappa_X, m.norm_X, lambda);
  m.norm_Y = gram_norm(Y);
  RealVector sw = linalg::singular_values(m.W);
  m.norm_W = sw.size() ? sw(0) : 0.0;
  const Eigen::Index rw = linalg::numerical_rank(sw, opts.rank_tol);
  m.kappa_W = rw ? sw(0) / sw(rw - 1) : std::numeric_limits<double>::infinity();
  if (!m.W.allFinite()) throw NumericalFailure("non-finite weights");

  for (const auto& [A, n, name] : {std::tuple<const Matrix&, double, const char*>{X, m.norm_X, "X"},
                                   std::tuple<const Matrix&, double, const char*>{Y, m.norm_Y, "Y"}}) {
    auto b = norm_bounds(A, n);
    if (!b.holds())
      throw NumericalFailure(std::string("norm bound violated for ") + name + ": " + std::to_string(b.lower) +
                             " <= " + std::to_string(b.norm) + " <= " + std::to_string(b.upper));
  }
  return m;
}

Prediction predict_skip(const WeightModel& model, const Vector& feature) {
  if (feature.size() != model.W.cols())
    throw DimensionMismatch("feature length " + std::to_string(feature.size()) + " does not match W columns " +
                            std::to_string(model.W.cols()));
  Prediction p;
  p.raw = model.W * feature;
  p.raw_norm = p.raw.norm();
  const double scale = std::max(1.0, model.norm_W * feature.norm());
  if (!(p.raw_norm > 1e-14 * scale)) throw DegeneratePrediction("W x is numerically zero");
  p.state = p.raw / p.raw_norm;
  return p;
}

RolloutResult predict_iterative(const WeightModel& model, const std::vector<StateVector>& seed,
                                std::uint64_t n_steps) {
  if (model.config.tau != 1) throw InvalidArgument("iterative prediction requires a model trained with tau = 1");
  const auto need = static_cast<std::size_t>(model.config.history() + 1);
  if (seed.size() < need)
    throw IndexOutOfRange("iterative seed needs " + std::to_string(need) + " states, got " + std::to_string(seed.size()));
  std::vector<StateVector> hist(seed.end() - static_cast<std::ptrdiff_t>(need), seed.end());
  RolloutResult out;
  out.series.first_index = 1;
  out.series.origin = "iterative rollout";
  out.series.states.reserve(n_steps);
  out.raw_norms.reserve(n_steps);
  for (std::uint64_t step = 0; step < n_steps; ++step) {
    Prediction p;
    try {
      p = predict_skip(model, make_feature(hist, model.config, model.layout));
    } catch (const DegeneratePrediction& e) {
      throw DegeneratePrediction("rollout aborted at step " + std::to_string(step + 1) + ": " + e.what());
    }
    hist.erase(hist.begin());
    hist.push_back(p.state);
    out.series.states.push_back(std::move(p.state));
    out.raw_norms.push_back(p.raw_norm);
  }
  return out;
}

double fidelity(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("fidelity of states with different dimensions");
  return std::abs(a.dot(b));
}

double pauli_expectation(const StateVector& s, const std::vector<PauliTerm>& ops) {
  const Eigen::Index D = s.size();
  if (!linalg::is_pow2(static_cast<std::uint64_t>(D))) throw DimensionMismatch("state dimension is not 2^n");
  const int n = linalg::ilog2(static_cast<std::uint64_t>(D));
  std::uint64_t flip = 0, zmask = 0, ymask = 0, seen = 0;
  for (const auto& op : ops) {
    if (op.site < 0 || op.site >= n) throw IndexOutOfRange("Pauli site " + std::to_string(op.site) + " out of range");
    const std::uint64_t b = std::uint64_t{1} << (n - 1 - op.site);
    if (seen & b) throw InvalidArgument("Pauli site " + std::to_string(op.site) + " repeated");
    seen |= b;
    if (op.axis == PauliAxis::X) flip ^= b;
    if (op.axis == PauliAxis::Z) zmask ^= b;
    if (op.axis == PauliAxis::Y) { flip ^= b; ymask ^= b; }
  }
  // ⟨s|O|s⟩ with O|j⟩ = phase(j)|j ⊕ flip⟩, Y = iXZ contributing i·(−1)^{bit}.
  cplx acc = 0.0;
  const int ny = std::popcount(ymask);
  const cplx iy = std::pow(cplx(0, 1), ny);
  for (std::uint64_t j = 0; j < static_cast<std::uint64_t>(D); ++j) {
    int sign = std::popcount(j & (zmask | ymask)) & 1;
    cplx ph = iy * (sign ? -1.0 : 1.0);
    acc += std::conj(s(static_cast<Eigen::Index>(j ^ flip))) * ph * s(static_cast<Eigen::Index>(j));
  }
  if (std::abs(acc.imag()) > 1e-10 * std::max(1.0, s.squaredNorm()))
    throw NumericalFailure("Pauli expectation has an imaginary residue");
  return acc.real();
}

double amplitude_error(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("amplitude error of states with different dimensions");
  return (a - b).cwiseAbs().maxCoeff();
}

double amplitude_error_aligned(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("amplitude error of states with different dimensions");
  cplx ov = a.dot(b);
  cplx ph = std::abs(ov) > 0 ? ov / std::abs(ov) : cplx(1.0);
  return (a * ph - b).cwiseAbs().maxCoeff();
}

}  // namespace qngrc
