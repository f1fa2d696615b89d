#include <doctest.h>

#include <cmath>
#include <random>

#include "qngrc/errors.hpp"
#include "qngrc/io.hpp"
#include "qngrc/linalg.hpp"
#include "qngrc/quantum_dynamics.hpp"

using namespace qngrc;

namespace {

Matrix pauli(char c) {
  Matrix P(2, 2);
  if (c == 'X') P << 0, 1, 1, 0;
  else if (c == 'Z') P << 1, 0, 0, -1;
  else P = Matrix::Identity(2, 2);
  return P;
}

Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

// Pauli string with the given letters at the listed sites, identity elsewhere; site 0 leftmost.
Matrix pauli_string(int n, const std::vector<std::pair<int, char>>& ops) {
  Matrix acc = Matrix::Identity(1, 1);
  for (int i = 0; i < n; ++i) {
    char c = 'I';
    for (auto [s, l] : ops)
      if (s == i) c = l;
    acc = kron(acc, pauli(c));
  }
  return acc;
}

Matrix tfim_oracle(int n, double J, double h) {
  const Eigen::Index D = Eigen::Index{1} << n;
  Matrix H = Matrix::Zero(D, D);
  for (int i = 0; i < n; ++i) {
    H -= J * pauli_string(n, {{i, 'Z'}, {(i + 1) % n, 'Z'}});
    H += h * pauli_string(n, {{i, 'X'}});
  }
  return H;
}

// Scaling and squaring with a Taylor core.
Matrix expm_oracle(const Matrix& A) {
  double nrm = 0.0;
  for (Eigen::Index j = 0; j < A.cols(); ++j) nrm = std::max(nrm, A.col(j).cwiseAbs().sum());
  int s = std::max(0, static_cast<int>(std::ceil(std::log2(nrm + 1e-300))) + 4);
  Matrix B = A / std::pow(2.0, s);
  Matrix E = Matrix::Identity(A.rows(), A.cols()), term = E;
  for (int k = 1; k < 30; ++k) {
    term = term * B / static_cast<double>(k);
    E += term;
  }
  for (int i = 0; i < s; ++i) E = E * E;
  return E;
}

}  // namespace

TEST_CASE("two-site field-free TFIM is -(Z⊗Z)") {
  const Hamiltonian H = build_tfim_hamiltonian(2, 0.5, 0.0);
  Matrix expect = Matrix::Zero(4, 4);
  expect.diagonal() << -1, 1, 1, -1;
  CHECK((H.matrix() - expect).norm() == doctest::Approx(0.0));
  CHECK(build_tfim_hamiltonian(2, 0.0, 0.0).matrix().norm() == 0.0);
}

TEST_CASE("TFIM matches the Kronecker Pauli-sum assembly entry by entry") {
  for (int n : {2, 3, 4}) {
    const Hamiltonian H = build_tfim_hamiltonian(n, 0.5, 5.0);
    CHECK((H.matrix() - tfim_oracle(n, 0.5, 5.0)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((H.matrix() - H.matrix().adjoint()).norm() < 1e-12);
    CHECK(H.dim() == (Eigen::Index{1} << n));
  }
}

TEST_CASE("TFIM rejects fewer than two sites") { CHECK_THROWS_AS(build_tfim_hamiltonian(1, 0.5, 5.0), InvalidArgument); }

TEST_CASE("Hamiltonian rejects non-Hermitian input") {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 1) = 1.0;
  CHECK_THROWS_AS(Hamiltonian(1, A), InvalidArgument);
}

TEST_CASE("max eigen-energy") {
  CHECK(max_eigen_energy(build_tfim_hamiltonian(2, 0.5, 0.0)) == doctest::Approx(1.0).epsilon(1e-14));
  const Matrix field = 5.0 * (pauli_string(2, {{0, 'X'}}) + pauli_string(2, {{1, 'X'}}));
  CHECK(max_eigen_energy(Hamiltonian(2, field)) == doctest::Approx(10.0).epsilon(1e-14));

  // Frozen from an independent dense diagonalization of the Pauli-sum matrix.
  const Hamiltonian H = build_tfim_hamiltonian(4, 0.5, 5.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(tfim_oracle(4, 0.5, 5.0));
  CHECK(max_eigen_energy(H) == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-13));
  CHECK(max_eigen_energy(H) == doctest::Approx(20.050187025312567).epsilon(1e-13));
  CHECK(step_from_emax(H) == doctest::Approx(0.00024937423245417604).epsilon(1e-13));
}

TEST_CASE("propagator is exact and unitary") {
  const Hamiltonian H = build_tfim_hamiltonian(4, 0.5, 5.0);
  const double dt = step_from_emax(H);
  const Propagator P = propagator(H, dt);
  CHECK(linalg::unitarity_residual(P.matrix) <= 1e-12);
  const Matrix oracle = expm_oracle(Matrix(cplx(0, -dt) * tfim_oracle(4, 0.5, 5.0)));
  CHECK((P.matrix - oracle).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((propagator(H, 0.0).matrix - Matrix::Identity(16, 16)).norm() < 1e-12);

  const double h = 5.0, t = 0.37;
  const Hamiltonian F(2, h * (pauli_string(2, {{0, 'X'}}) + pauli_string(2, {{1, 'X'}})));
  Matrix one = std::cos(h * t) * Matrix::Identity(2, 2) - cplx(0, std::sin(h * t)) * pauli('X');
  CHECK((propagator(F, t).matrix - kron(one, one)).norm() < 1e-12);
}

TEST_CASE("evolve_series") {
  const Hamiltonian H = build_tfim_hamiltonian(4, 0.5, 5.0);
  const StateVector s0 = basis_state(4, 0);
  SUBCASE("identity propagator copies the seed") {
    const TimeSeries ts = evolve_series(Propagator{Matrix::Identity(16, 16), 0.1}, s0, 3, 0);
    REQUIRE(ts.size() == 3);
    for (const auto& s : ts.states) CHECK((s - s0).norm() == 0.0);
  }
  SUBCASE("single step without burn-in is the seed") {
    const TimeSeries ts = evolve_series(propagator(H, 0.01), s0, 1, 0);
    REQUIRE(ts.size() == 1);
    CHECK((ts.states[0] - s0).norm() == 0.0);
  }
  SUBCASE("stepping matches one-shot exponentials") {
    const double dt = step_from_emax(H);
    const TimeSeries ts = evolve_series(propagator(H, dt), s0, 100, 0);
    const Matrix Hm = tfim_oracle(4, 0.5, 5.0);
    for (int k : {0, 1, 17, 50, 99}) {
      const StateVector ref = expm_oracle(Matrix(cplx(0, -dt * k) * Hm)) * s0;
      CHECK((ts.states[static_cast<std::size_t>(k)] - ref).norm() < 1e-9);
    }
    ts.validate(1e-10);
  }
  SUBCASE("burn-in discards leading steps") {
    const double dt = 0.01;
    const TimeSeries a = evolve_series(propagator(H, dt), s0, 10, 0);
    const TimeSeries b = evolve_series(propagator(H, dt), s0, 5, 5);
    for (int k = 0; k < 5; ++k) CHECK((a.states[5 + k] - b.states[k]).norm() < 1e-13);
  }
  SUBCASE("non-normalized seed is rejected") {
    CHECK_THROWS_AS(evolve_series(propagator(H, 0.01), 1.1 * s0, 3, 0), InvalidArgument);
  }
}

TEST_CASE("state_at agrees with stepping and composes") {
  const Hamiltonian H = build_tfim_hamiltonian(4, 0.5, 5.0);
  const double dt = step_from_emax(H);
  std::mt19937_64 rng(3);
  const StateVector s0 = linalg::random_state(16, rng);
  CHECK((state_at(H, s0, 0.0) - s0).norm() < 1e-14);
  CHECK((state_at(H, s0, dt) - propagator(H, dt).matrix * s0).norm() < 1e-12);
  const TimeSeries ts = evolve_series(propagator(H, dt), s0, 51, 0);
  CHECK((state_at(H, s0, 50 * dt) - ts.states[50]).norm() < 1e-9);
  const double t1 = 0.731, t2 = 12.5;
  CHECK((state_at(H, s0, t1 + t2) - state_at(H, state_at(H, s0, t1), t2)).norm() < 1e-10);
}

TEST_CASE("norm and energy are conserved over long trajectories") {
  const Hamiltonian H = build_tfim_hamiltonian(4, 0.5, 5.0);
  const TimeSeries ts = evolve_series(propagator(H, step_from_emax(H)), basis_state(4, 0), 20000, 0);
  const double e0 = (ts.states[0].adjoint() * H.matrix() * ts.states[0])(0, 0).real();
  double worst_norm = 0.0, worst_energy = 0.0;
  for (std::size_t k = 0; k < ts.size(); k += 97) {
    const auto& s = ts.states[k];
    worst_norm = std::max(worst_norm, std::abs(s.norm() - 1.0));
    worst_energy = std::max(worst_energy, std::abs((s.adjoint() * H.matrix() * s)(0, 0).real() - e0));
  }
  CHECK(worst_norm <= 1e-10);
  CHECK(worst_energy <= 1e-9);
}

TEST_CASE("time labels address states") {
  TimeSeries ts = evolve_series(propagator(build_tfim_hamiltonian(2, 1.0, 1.0), 0.1), basis_state(2, 0), 4, 0);
  ts.first_index = -1;
  CHECK(ts.last_index() == 2);
  CHECK(ts.covers(-1));
  CHECK_FALSE(ts.covers(3));
  CHECK((ts.at(0) - ts.states[1]).norm() == 0.0);
  CHECK_THROWS_AS(ts.at(3), IndexOutOfRange);
}

TEST_CASE("series files round-trip bit-exactly") {
  TimeSeries ts = evolve_series(propagator(build_tfim_hamiltonian(2, 0.5, 5.0), 0.01), basis_state(2, 1), 8, 3);
  ts.first_index = -1;
  ts.n_qubits = 2;
  ts.J = 0.5;
  ts.h = 5.0;
  ts.origin = "round trip";
  const std::string bin = "/tmp/qngrc_test_series.qts", js = "/tmp/qngrc_test_series.json";
  io::write_series(bin, ts);
  io::write_series_json(js, ts);
  for (const TimeSeries& back : {io::read_series(bin), io::read_series_json(js)}) {
    REQUIRE(back.size() == ts.size());
    CHECK(back.first_index == -1);
    CHECK(back.burn_in == 3);
    CHECK(back.dt == ts.dt);
    CHECK(back.origin == ts.origin);
    for (std::size_t k = 0; k < ts.size(); ++k) CHECK((back.states[k] - ts.states[k]).norm() == 0.0);
  }
  CHECK_THROWS_AS(io::read_series("/tmp/does_not_exist.qts"), IoError);
}
