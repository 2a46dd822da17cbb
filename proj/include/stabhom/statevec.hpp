#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "stabhom/pauli.hpp"

namespace stabhom {

// Unit-norm pure state on `width` qubits. Basis index bit (width-1-k) holds qubit k+1.
class StateVector {
 public:
  StateVector() = default;
  StateVector(int width, Eigen::VectorXcd amplitudes);  // validates norm

  // Rescales a nonzero vector to unit norm.
  static StateVector normalized(int width, Eigen::VectorXcd amplitudes);
  static StateVector basis(std::string_view bits);
  // (|0...0> + sign |1...1>)/sqrt2
  static StateVector ghz(int n, int relative_sign = 1);

  int width() const noexcept { return width_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(amps_.size()); }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amps_; }
  Complex amplitude(std::size_t index) const { return amps_(static_cast<Eigen::Index>(index)); }

  // JSON array of [re, im] pairs.
  nlohmann::json to_json() const;
  static StateVector from_json(const nlohmann::json& j);

 private:
  int width_ = 0;
  Eigen::VectorXcd amps_;
};

// Hermitian, unit-trace, positive semidefinite operator.
class DensityOperator {
 public:
  DensityOperator() = default;
  DensityOperator(int width, Eigen::MatrixXcd matrix);  // validates

  static DensityOperator pure(const StateVector& psi);
  static DensityOperator maximally_mixed(int width);

  int width() const noexcept { return width_; }
  const Eigen::MatrixXcd& matrix() const noexcept { return rho_; }

 private:
  int width_ = 0;
  Eigen::MatrixXcd rho_;
};

StateVector make_pair_superposition(std::string_view a, std::string_view b, Complex amp_a, Complex amp_b);

double expectation(const StateVector& psi, const SignedPauliTerm& term);
double expectation(const StateVector& psi, const PauliSum& op);
double expectation(const Eigen::VectorXcd& psi, const PauliSum& op);  // any unit vector
double expectation_density(const DensityOperator& rho, const SignedPauliTerm& term);
double expectation_density(const DensityOperator& rho, const PauliSum& op);

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXcd vector;
};

// Largest eigenvalue of a Hermitian matrix (dimension at most 4096).
double max_eigenvalue(const Eigen::MatrixXcd& op);
double min_eigenvalue(const Eigen::MatrixXcd& op);
EigenPair top_eigenpair(const Eigen::MatrixXcd& op);
EigenPair bottom_eigenpair(const Eigen::MatrixXcd& op);

// Classical-quantum state sum_k p_k |phi_k><phi_k| (x) rho_k. The kets live on
// qubit 1 and must be orthonormal; all rho_k share one width.
DensityOperator make_cq_state(std::span<const double> probs, std::span<const Eigen::Vector2cd> kets,
                              std::span<const DensityOperator> rhos);

// Reduced state of qubit 1 of a multi-qubit density operator.
Eigen::Matrix2cd reduced_first_qubit(const DensityOperator& rho);

// Kronecker product; a holds the more significant qubits.
Eigen::VectorXcd kron(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

}  // namespace stabhom

namespace stabhom {

// Builds a state from a JSON description. Accepted forms:
//   {"kind": "basis", "bits": "011"}
//   {"kind": "ghz", "n": 3, "sign": -1}
//   {"kind": "pair", "a": "011", "b": "100", "amp_a": 0.7071..., "amp_b": [re, im]}
//   {"kind": "pair", "a": "011", "b": "100", "relative_sign": -1}   (equal weights)
//   {"kind": "amplitudes", "amplitudes": [[re, im], ...], "normalize": false}
StateVector state_from_spec(const nlohmann::json& spec);

// Shorthand text forms for the command line: "ghz:3", "ghz:3:-", "basis:011",
// "pair:011,100,-" (equal weights, relative sign + or -), or inline JSON.
StateVector state_from_text(std::string_view text);

}  // namespace stabhom
