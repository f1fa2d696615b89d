#include "qngrc/quantum_dynamics.hpp"

#include <cmath>

#include "qngrc/errors.hpp"
#include "qngrc/linalg.hpp"

namespace qngrc {

Hamiltonian::Hamiltonian(int n_qubits, Matrix matrix, std::string model, double J, double h)
    : n_qubits_(n_qubits), J_(J), h_(h), model_(std::move(model)), matrix_(std::move(matrix)) {
  if (n_qubits < 1 || n_qubits > 14) throw InvalidArgument("Hamiltonian needs 1..14 qubits");
  const Eigen::Index D = Eigen::Index{1} << n_qubits;
  if (matrix_.rows() != D || matrix_.cols() != D)
    throw DimensionMismatch("Hamiltonian matrix must be " + std::to_string(D) + "x" + std::to_string(D));
  if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw InvalidArgument("Hamiltonian matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(matrix_);
  if (es.info() != Eigen::Success) throw NumericalFailure("Hermitian eigensolver did not converge");
  spectrum_ = std::make_shared<Spectrum>(Spectrum{es.eigenvalues(), es.eigenvectors()});
}

const StateVector& TimeSeries::at(std::int64_t k) const {
  if (!covers(k))
    throw IndexOutOfRange("time index " + std::to_string(k) + " outside series range [" +
                          std::to_string(first_index) + ", " + std::to_string(last_index()) + "]");
  return states[static_cast<std::size_t>(k - first_index)];
}

void TimeSeries::validate(double tol) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].size() != dim()) throw DimensionMismatch("series states differ in dimension");
    if (std::abs(states[i].norm() - 1.0) > tol)
      throw InvalidArgument("series state " + std::to_string(i) + " is not unit norm");
  }
}

Hamiltonian build_tfim_hamiltonian(int n_qubits, double J, double h) {
  if (n_qubits < 2) throw InvalidArgument("TFIM needs n_qubits >= 2 for the periodic bond");
  if (n_qubits > 14) throw ResourceLimit("TFIM dense matrix limited to 14 qubits");
  const std::uint64_t D = std::uint64_t{1} << n_qubits;
  Matrix H = Matrix::Zero(D, D);
  // Qubit i sits at bit (n−1−i) of the basis index.
  auto bit = [n_qubits](int i) { return std::uint64_t{1} << (n_qubits - 1 - i); };
  for (std::uint64_t b = 0; b < D; ++b) {
    double diag = 0.0;
    for (int i = 0; i < n_qubits; ++i) {
      int j = (i + 1) % n_qubits;
      bool zi = b & bit(i), zj = b & bit(j);
      diag += (zi == zj) ? -J : J;
      H(b ^ bit(i), b) += h;
    }
    H(b, b) += diag;
  }
  return Hamiltonian(n_qubits, std::move(H), "tfim", J, h);
}

double max_eigen_energy(const Hamiltonian& H) {
  const auto& e = H.spectrum().energies;
  return e(e.size() - 1);
}

double step_from_emax(const Hamiltonian& H, double divisor) {
  double emax = max_eigen_energy(H);
  if (!(emax > 0.0)) throw InvalidArgument("step rule needs a positive maximal energy");
  return 1.0 / (divisor * emax);
}

namespace {

Vector phases(const RealVector& energies, double t) {
  Vector ph(energies.size());
  for (Eigen::Index i = 0; i < energies.size(); ++i) ph(i) = std::polar(1.0, -energies(i) * t);
  return ph;
}

void check_unit(const StateVector& s, double tol, const char* what) {
  if (std::abs(s.norm() - 1.0) > tol) throw InvalidArgument(std::string(what) + " is not unit norm");
}

}  // namespace

Propagator propagator(const Hamiltonian& H, double dt) {
  if (!std::isfinite(dt)) throw InvalidArgument("propagator step must be finite");
  const auto& sp = H.spectrum();
  Matrix U = sp.vectors * phases(sp.energies, dt).asDiagonal() * sp.vectors.adjoint();
  return Propagator{std::move(U), dt};
}

TimeSeries evolve_series(const Propagator& P, const StateVector& s0, std::uint64_t n_steps,
                         std::uint64_t burn_in) {
  if (s0.size() != P.matrix.rows()) throw DimensionMismatch("initial state does not match propagator");
  check_unit(s0, 1e-8, "initial state");
  TimeSeries ts;
  ts.dt = P.dt;
  ts.burn_in = burn_in;
  ts.states.reserve(n_steps);
  StateVector s = s0 / s0.norm();
  for (std::uint64_t k = 0; k < burn_in; ++k) {
    s = P.matrix * s;
    s.normalize();
  }
  for (std::uint64_t k = 0; k < n_steps; ++k) {
    if (k > 0) {
      s = P.matrix * s;
      s.normalize();
    }
    ts.states.push_back(s);
  }
  return ts;
}

StateVector state_at(const Hamiltonian& H, const StateVector& s0, double t) {
  if (s0.size() != H.dim()) throw DimensionMismatch("state does not match Hamiltonian");
  check_unit(s0, 1e-8, "initial state");
  const auto& sp = H.spectrum();
  Vector c = sp.vectors.adjoint() * s0;
  StateVector s = sp.vectors * (phases(sp.energies, t).asDiagonal() * c);
  return s;
}

StateVector basis_state(int n_qubits, std::uint64_t index) {
  const Eigen::Index D = Eigen::Index{1} << n_qubits;
  if (index >= static_cast<std::uint64_t>(D)) throw IndexOutOfRange("basis index out of range");
  StateVector s = StateVector::Zero(D);
  s(index) = 1.0;
  return s;
}

}  // namespace qngrc
