#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qngrc/types.hpp"

namespace qngrc {

struct Spectrum {
  RealVector energies;  // ascending
  Matrix vectors;       // columns are eigenvectors
};

class Hamiltonian {
 public:
  /// Generic Hermitian operator on n_qubits; the eigendecomposition is computed
  /// once here and shared by every propagator/state_at call.
  Hamiltonian(int n_qubits, Matrix matrix, std::string model = "custom", double J = 0.0,
              double h = 0.0);

  int n_qubits() const { return n_qubits_; }
  double J() const { return J_; }
  double h() const { return h_; }
  const std::string& model() const { return model_; }
  const Matrix& matrix() const { return matrix_; }
  const Spectrum& spectrum() const { return *spectrum_; }
  Eigen::Index dim() const { return matrix_.rows(); }

 private:
  int n_qubits_;
  double J_, h_;
  std::string model_;
  Matrix matrix_;
  std::shared_ptr<const Spectrum> spectrum_;
};

struct Propagator {
  Matrix matrix;
  double dt = 0.0;
};

struct TimeSeries {
  std::vector<StateVector> states;
  double dt = 0.0;
  std::uint64_t burn_in = 0;
  std::string origin;
  // Time label of states[0]; lets delayed inputs and shifted targets share one axis.
  std::int64_t first_index = 0;
  int n_qubits = 0;
  double J = 0.0;
  double h = 0.0;

  std::size_t size() const { return states.size(); }
  Eigen::Index dim() const { return states.empty() ? 0 : states.front().size(); }
  std::int64_t last_index() const { return first_index + static_cast<std::int64_t>(states.size()) - 1; }
  bool covers(std::int64_t k) const { return k >= first_index && k <= last_index(); }
  /// State with time label k; throws IndexOutOfRange.
  const StateVector& at(std::int64_t k) const;
  /// Checks the shared-dimension and unit-norm invariants.
  void validate(double tol = 1e-10) const;
};

Hamiltonian build_tfim_hamiltonian(int n_qubits, double J, double h);
double max_eigen_energy(const Hamiltonian& H);
/// Δt = 1/(divisor·E_max).
double step_from_emax(const Hamiltonian& H, double divisor = 200.0);
Propagator propagator(const Hamiltonian& H, double dt);
TimeSeries evolve_series(const Propagator& P, const StateVector& s0, std::uint64_t n_steps,
                         std::uint64_t burn_in);
StateVector state_at(const Hamiltonian& H, const StateVector& s0, double t);
StateVector basis_state(int n_qubits, std::uint64_t index = 0);

}  // namespace qngrc
