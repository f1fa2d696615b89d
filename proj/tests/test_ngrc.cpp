#include <doctest.h>

#include <cmath>
#include <random>

#include "qngrc/errors.hpp"
#include "qngrc/linalg.hpp"
#include "qngrc/metrics.hpp"
#include "qngrc/ngrc.hpp"

using namespace qngrc;

namespace {

TimeSeries synthetic_series(int n_qubits, int count, std::uint64_t seed, std::int64_t first = 0) {
  std::mt19937_64 rng(seed);
  TimeSeries ts;
  for (int i = 0; i < count; ++i) ts.states.push_back(linalg::random_state(Eigen::Index{1} << n_qubits, rng));
  ts.first_index = first;
  ts.n_qubits = n_qubits;
  return ts;
}

// Tikhonov weights from a plain Jacobi SVD of X.
Matrix tikhonov_oracle(const Matrix& X, const Matrix& Y, double lambda) {
  Eigen::JacobiSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  RealVector f(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) f(i) = s(i) / (s(i) * s(i) + lambda);
  return Y * svd.matrixV() * f.asDiagonal() * svd.matrixU().adjoint();
}

Matrix pauli_dense(int n, const std::vector<std::pair<int, char>>& ops) {
  Matrix acc = Matrix::Identity(1, 1);
  for (int i = 0; i < n; ++i) {
    Matrix P = Matrix::Identity(2, 2);
    for (auto [s, c] : ops) {
      if (s != i) continue;
      if (c == 'X') P << 0, 1, 1, 0;
      if (c == 'Y') P << 0, cplx(0, -1), cplx(0, 1), 0;
      if (c == 'Z') P << 1, 0, 0, -1;
    }
    Matrix K(acc.rows() * 2, acc.cols() * 2);
    for (Eigen::Index a = 0; a < acc.rows(); ++a)
      for (Eigen::Index b = 0; b < acc.cols(); ++b) K.block(2 * a, 2 * b, 2, 2) = acc(a, b) * P;
    acc = K;
  }
  return acc;
}

}  // namespace

TEST_CASE("delay vectors") {
  const TimeSeries ts = synthetic_series(2, 9, 1);
  CHECK((delay_vector(ts, 3, 1, 1) - ts.states[3]).norm() == 0.0);
  const Vector o = delay_vector(ts, 1, 2, 1);
  REQUIRE(o.size() == 8);
  CHECK((o.head(4) - ts.states[1]).norm() == 0.0);
  CHECK((o.tail(4) - ts.states[0]).norm() == 0.0);
  // Naive slicing: entries of s_4, s_2, s_0 in that order.
  const Vector o3 = delay_vector(ts, 4, 3, 2);
  std::vector<cplx> flat;
  for (int idx : {4, 2, 0})
    for (int i = 0; i < 4; ++i) flat.push_back(ts.states[static_cast<std::size_t>(idx)](i));
  for (std::size_t i = 0; i < flat.size(); ++i) CHECK(o3(static_cast<Eigen::Index>(i)) == flat[i]);
  CHECK_THROWS_AS(delay_vector(ts, 3, 3, 2), IndexOutOfRange);
}

TEST_CASE("feature vectors") {
  Vector o(2);
  o << cplx(0.6, 0.1), cplx(-0.3, 0.7);
  const Vector x = feature_vector(o, 2);
  REQUIRE(x.size() == 6);
  CHECK(x(0) == o(0));
  CHECK(x(3) == o(0) * o(1));
  CHECK(x(4) == o(1) * o(0));
  CHECK(feature_length(16, 2, 2, Layout::concatenated) == 1056);
  CHECK(feature_length(16, 2, 2, Layout::padded) == 8 * 16 * 16);

  std::mt19937_64 rng(5);
  const Vector r = linalg::random_state(3, rng);
  const Vector x3 = feature_vector(r, 3);
  REQUIRE(x3.size() == 3 + 27);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) CHECK(std::abs(x3(3 + 9 * i + 3 * j + k) - r(i) * r(j) * r(k)) < 1e-15);
  CHECK_THROWS_AS(feature_vector(r, 0), InvalidArgument);
  CHECK_THROWS_AS(feature_length(1 << 10, 2, 4, Layout::concatenated), ResourceLimit);
}

TEST_CASE("padded feature bookkeeping") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector o = linalg::random_state(4, rng);  // m = 2, D = 2
    const Vector x = padded_feature_vector(o);
    REQUIRE(x.size() == 32);
    CHECK(x.norm() == doctest::Approx(1.0).epsilon(1e-14));
    const Vector back = unpad_feature(x, 4, 2);
    CHECK((back - feature_vector(o, 2)).norm() < 1e-14);
    // Monomials scaled by 1/√2 at the front, the linear block right after (mD)^p.
    for (int i = 0; i < 16; ++i) CHECK(std::abs(x(i) - o(i / 4) * o(i % 4) / std::sqrt(2.0)) < 1e-15);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(x(16 + i) - o(i) / std::sqrt(2.0)) < 1e-15);
    CHECK(x.tail(12).norm() == 0.0);
  }
  CHECK_THROWS_AS(padded_feature_vector(Vector::Ones(4)), InvalidArgument);
}

TEST_CASE("assemble_training") {
  const TimeSeries in = synthetic_series(2, 65, 2, -1);
  TimeSeries tg = synthetic_series(2, 64, 3, 1);
  FeatureConfig cfg;
  cfg.tau = 1;
  auto [X, Y] = assemble_training(in, tg, cfg, Layout::concatenated);
  REQUIRE(X.columns.cols() == 64);
  REQUIRE(Y.cols() == 64);
  for (int k = 0; k < 64; ++k) {
    Vector o(8);
    o << in.at(k), in.at(k - 1);
    CHECK((X.columns.col(k) - feature_vector(o, 2)).norm() == 0.0);
    CHECK((Y.col(k) - tg.at(k + 1)).norm() == 0.0);
  }
  tg.states.pop_back();
  CHECK_THROWS_AS(assemble_training(in, tg, cfg, Layout::concatenated), DimensionMismatch);

  const TimeSeries one = synthetic_series(1, 2, 4, -1);
  const TimeSeries one_t = synthetic_series(1, 1, 5, 1);
  auto [X1, Y1] = assemble_training(one, one_t, cfg, Layout::padded);
  CHECK(X1.columns.cols() == 1);
  CHECK(Y1.cols() == 1);
  CHECK(X1.columns.col(0).norm() == doctest::Approx(1.0));
}

TEST_CASE("train_weights against the SVD Tikhonov identity") {
  std::mt19937_64 rng(7);
  const Matrix X = linalg::random_matrix(6, 10, rng), Y = linalg::random_matrix(3, 10, rng);
  const WeightModel m = train_weights(X, Y, 1e-3);
  CHECK((m.W - tikhonov_oracle(X, Y, 1e-3)).cwiseAbs().maxCoeff() < 1e-9);
  // Normal equation W(XX† + λI) = YX†.
  const Matrix lhs = m.W * (X * X.adjoint() + 1e-3 * Matrix::Identity(6, 6));
  CHECK((lhs - Y * X.adjoint()).norm() / (Y * X.adjoint()).norm() < 1e-8);
  CHECK(m.kappa_X >= 1.0);
  CHECK(m.kappa >= 1.0);
}

TEST_CASE("train_weights limits") {
  CHECK((train_weights(Matrix::Identity(4, 4), Matrix::Identity(4, 4), 0.0).W - Matrix::Identity(4, 4)).norm() < 1e-12);
  std::mt19937_64 rng(8);
  const Matrix X = linalg::random_matrix(5, 5, rng), Y = linalg::random_matrix(2, 5, rng);
  const WeightModel big = train_weights(X, Y, 1e12);
  CHECK(big.norm_W <= big.norm_Y * big.norm_X / 1e12 * (1 + 1e-9));
  const WeightModel exact = train_weights(X, Y, 0.0);
  CHECK((exact.W * X - Y).norm() < 1e-8 * Y.norm());

  // Wide row-deficient X: λ = 0 falls back to the pseudoinverse unless full rank is demanded.
  Matrix Xd = Matrix::Zero(4, 3);
  Xd.topRows(3) = linalg::random_matrix(3, 3, rng);
  const Matrix Yd = linalg::random_matrix(2, 3, rng);
  CHECK_NOTHROW(train_weights(Xd, Yd, 0.0));
  TrainOptions strict;
  strict.rank_policy = RankPolicy::require_full_row_rank;
  CHECK_THROWS_AS(train_weights(Xd, Yd, 0.0, strict), IllConditioned);
  CHECK_THROWS_AS(train_weights(Matrix::Zero(3, 3), Yd, 0.0), IllConditioned);
}

TEST_CASE("kappa_regularized") {
  CHECK(kappa_regularized(7.0, 3.0, 0.0) == doctest::Approx(7.0));
  CHECK(kappa_regularized(1.0, 3.0, 2.5) == doctest::Approx(1.0));
  CHECK(kappa_regularized(10.0, 2.0, 1.0) == doctest::Approx(10.0 * std::sqrt(5.0 / 104.0)).epsilon(1e-15));
  CHECK(kappa_regularized(10.0, 2.0, 1.0) == doctest::Approx(2.1926450482675732).epsilon(1e-14));
}

TEST_CASE("shift covariance of training") {
  const TimeSeries a = synthetic_series(1, 21, 9, -1), at = synthetic_series(1, 20, 10, 1);
  TimeSeries b = a, bt = at;
  b.first_index += 1000;
  bt.first_index += 1000;
  FeatureConfig cfg;
  cfg.lambda = 1e-3;
  auto [Xa, Ya] = assemble_training(a, at, cfg, Layout::concatenated);
  auto [Xb, Yb] = assemble_training(b, bt, cfg, Layout::concatenated);
  CHECK((train_weights(Xa, Ya, cfg).W - train_weights(Xb, Yb, cfg).W).norm() <= 1e-12);
}

TEST_CASE("predict_skip and predict_iterative") {
  WeightModel id;
  id.W = Matrix::Identity(4, 4);
  Vector x(4);
  x << 1, 2, 0, cplx(0, 2);
  const Prediction p = predict_skip(id, x);
  CHECK((p.state - x / 3.0).norm() < 1e-15);
  CHECK(p.raw_norm == doctest::Approx(3.0));
  CHECK_THROWS_AS(predict_skip(id, Vector::Zero(4)), DegeneratePrediction);
  CHECK_THROWS_AS(predict_skip(id, Vector::Ones(3)), DimensionMismatch);

  // A training column is reproduced when the system is exactly solvable.
  const TimeSeries in = synthetic_series(1, 7, 12, -1), tg = synthetic_series(1, 6, 13, 1);
  FeatureConfig cfg;
  cfg.tau = 1;
  auto [X, Y] = assemble_training(in, tg, cfg, Layout::concatenated);
  const WeightModel m = train_weights(X, Y, cfg);
  for (int k = 0; k < 6; ++k) CHECK(fidelity(predict_skip(m, X.columns.col(k)).state, Y.col(k)) > 1 - 1e-8);

  // One rollout step equals one skip prediction.
  std::vector<StateVector> seed = {in.at(-1), in.at(0)};
  const RolloutResult r = predict_iterative(m, seed, 1);
  REQUIRE(r.series.size() == 1);
  CHECK((r.series.states[0] - predict_skip(m, make_feature(seed, cfg, Layout::concatenated)).state).norm() < 1e-14);
  CHECK(r.series.first_index == 1);

  WeightModel skip = m;
  skip.config.tau = 5;
  CHECK_THROWS_AS(predict_iterative(skip, seed, 3), InvalidArgument);
}

TEST_CASE("identity dynamics roll out to a constant") {
  TimeSeries in;
  std::mt19937_64 rng(14);
  const StateVector s = linalg::random_state(2, rng);
  for (int i = 0; i < 12; ++i) in.states.push_back(s * std::polar(1.0, 0.0));
  in.first_index = -1;
  TimeSeries tg = in;
  tg.states.pop_back();
  tg.first_index = 1;
  in.states.pop_back();
  FeatureConfig cfg;
  cfg.tau = 1;
  cfg.lambda = 1e-6;
  auto [X, Y] = assemble_training(in, tg, cfg, Layout::concatenated);
  const WeightModel m = train_weights(X, Y, cfg);
  const RolloutResult r = predict_iterative(m, {s, s}, 20);
  for (const auto& p : r.series.states) CHECK(fidelity(p, s) > 1 - 1e-9);
}

TEST_CASE("fidelity and Pauli expectations") {
  std::mt19937_64 rng(15);
  const StateVector a = linalg::random_state(16, rng), b = linalg::random_state(16, rng);
  cplx dot = 0;
  for (int i = 0; i < 16; ++i) dot += std::conj(a(i)) * b(i);
  CHECK(fidelity(a, b) == doctest::Approx(std::abs(dot)).epsilon(1e-14));
  CHECK(fidelity(a, a) == doctest::Approx(1.0));
  CHECK(fidelity(linalg::pad(Matrix::Identity(2, 1), 2, 1).col(0), Vector::Unit(2, 1)) == 0.0);

  const StateVector zero = Vector::Unit(4, 0);
  CHECK(pauli_expectation(zero, {{0, PauliAxis::Z}}) == doctest::Approx(1.0));
  StateVector plus0 = Vector::Zero(4);
  plus0(0) = plus0(2) = 1 / std::sqrt(2.0);
  CHECK(pauli_expectation(plus0, {{0, PauliAxis::X}}) == doctest::Approx(1.0));

  for (auto ops : std::vector<std::vector<std::pair<int, char>>>{{{0, 'X'}, {1, 'X'}}, {{2, 'Y'}}, {{1, 'Z'}, {3, 'Y'}}}) {
    std::vector<PauliTerm> terms;
    for (auto [s, c] : ops) terms.push_back({s, c == 'X' ? PauliAxis::X : c == 'Y' ? PauliAxis::Y : PauliAxis::Z});
    const double oracle = (a.adjoint() * pauli_dense(4, ops) * a)(0, 0).real();
    CHECK(pauli_expectation(a, terms) == doctest::Approx(oracle).epsilon(1e-12));
  }
  CHECK_THROWS_AS(pauli_expectation(a, {{4, PauliAxis::X}}), IndexOutOfRange);
}

TEST_CASE("norm bounds hold on assembled pairs") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index rows = 2 + trial % 7, cols = 1 + (trial * 5) % 13;
    Matrix A = linalg::random_matrix(rows, cols, rng);
    for (Eigen::Index c = 0; c < cols; ++c) A.col(c).normalize();
    const NormBounds b = norm_bounds(A, linalg::spectral_norm(A));
    CHECK(b.holds());
    CHECK(b.lower == doctest::Approx(1.0 / std::sqrt(static_cast<double>(cols))));
  }
}

TEST_CASE("model files round-trip exactly") {
  std::mt19937_64 rng(17);
  const Matrix X = linalg::random_matrix(6, 9, rng), Y = linalg::random_matrix(2, 9, rng);
  FeatureMatrix fm{X, Layout::padded, 2, -1};
  FeatureConfig cfg;
  cfg.lambda = 0.25;
  cfg.tau = 42;
  const WeightModel m = train_weights(fm, Y, cfg);
  save_model("/tmp/qngrc_test_model.qwm", m);
  const WeightModel back = load_model("/tmp/qngrc_test_model.qwm");
  CHECK((back.W - m.W).norm() == 0.0);
  CHECK(back.config.tau == 42);
  CHECK(back.config.lambda == 0.25);
  CHECK(back.layout == Layout::padded);
  CHECK(back.kappa == m.kappa);
  CHECK_THROWS_AS(load_model("/tmp/qngrc_missing_model.qwm"), IoError);
}

TEST_CASE("metrics CSV and summaries") {
  std::mt19937_64 rng(18);
  std::vector<StateVector> pred, tgt;
  std::vector<double> raw;
  for (int i = 0; i < 10; ++i) {
    pred.push_back(linalg::random_state(4, rng));
    tgt.push_back(linalg::random_state(4, rng));
    raw.push_back(1.0 + 0.01 * i);
  }
  const auto rows = evaluate_predictions(pred, raw, tgt, 5);
  write_metrics_csv("/tmp/qngrc_test_metrics.csv", rows);
  const auto back = read_metrics_csv("/tmp/qngrc_test_metrics.csv");
  REQUIRE(back.size() == 10);
  double sum = 0, mn = 1, sq0 = 0, sq1 = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(back[i].step == static_cast<std::int64_t>(5 + i));
    CHECK(back[i].fidelity == rows[i].fidelity);
    CHECK(back[i].fidelity == doctest::Approx(fidelity(pred[i], tgt[i])).epsilon(1e-12));
    sum += rows[i].fidelity;
    mn = std::min(mn, rows[i].fidelity);
    sq0 += std::pow(rows[i].exp_X0 - rows[i].target_X0, 2);
    sq1 += std::pow(rows[i].exp_X0X1 - rows[i].target_X0X1, 2);
  }
  const MetricsSummary s = summarize(back);
  CHECK(s.mean_fidelity == doctest::Approx(sum / 10).epsilon(1e-14));
  CHECK(s.min_fidelity == mn);
  CHECK(s.final_fidelity == rows.back().fidelity);
  CHECK(s.rms_X0 == doctest::Approx(std::sqrt(sq0 / 10)).epsilon(1e-14));
  CHECK(s.rms_X0X1 == doctest::Approx(std::sqrt(sq1 / 10)).epsilon(1e-14));
  CHECK(s.max_raw_norm_drift == doctest::Approx(0.09));

  const std::vector<double> v = {1, 2, 3, 4, 5, 6};
  const auto ma = moving_average(v, 3);
  REQUIRE(ma.size() == 4);
  CHECK(ma[0] == doctest::Approx(2.0));
  CHECK(ma[3] == doctest::Approx(5.0));
}
