#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "stabhom/pauli.hpp"
#include "stabhom/statevec.hpp"

namespace stabhom {

inline constexpr int kMaxImageWidth = 8;
inline constexpr int kMaxHomomorphismWidth = 6;

// Two-dimensional code space spanned by an orthonormal pair |0_L>, |1_L>.
class LogicalEncoding {
 public:
  LogicalEncoding(StateVector zero, StateVector one, std::string label = "custom");

  // |0_L> = |0...0>, |1_L> = |1...1>
  static LogicalEncoding ghz(int n);
  static LogicalEncoding basis_pair(std::string_view zero_bits, std::string_view one_bits);
  // {"kind": "ghz", "n": 3} or {"kind": "states", "zero": <state spec>, "one": <state spec>}
  static LogicalEncoding from_json(const nlohmann::json& j);

  int width() const noexcept { return zero_.width(); }
  const StateVector& zero() const noexcept { return zero_; }
  const StateVector& one() const noexcept { return one_; }
  const std::string& label() const noexcept { return label_; }
  nlohmann::json to_json() const;

  // Image of a single-qubit state a|0> + b|1>.
  Eigen::VectorXcd encode(Complex a, Complex b) const;

 private:
  StateVector zero_;
  StateVector one_;
  std::string label_;
};

struct LogicalAction {
  Letter letter;
  int sign;
  bool operator==(const LogicalAction&) const = default;
};

// 2x2 matrix of p restricted to the code space, or nothing if p leaks out of it.
std::optional<Eigen::Matrix2cd> restrict_to_code(const PauliString& p, const LogicalEncoding& enc);

std::optional<LogicalAction> classify_action(const SignedPauliTerm& p, const LogicalEncoding& enc);

Eigen::Matrix2cd logical_matrix(Letter letter);

struct ImageSet {
  Letter logical_letter = Letter::I;
  std::vector<SignedPauliTerm> members;  // canonical order

  bool contains(const SignedPauliTerm& t) const;
  std::vector<std::string> strings() const;
};

// Exhaustive over all 4^N strings; N <= 8.
ImageSet image_set(const LogicalEncoding& enc, Letter letter, int workers = 1);

struct HomomorphismCheck {
  bool ok = true;
  std::size_t pairs_checked = 0;
  std::vector<std::string> violations;  // at most 20 recorded
};

HomomorphismCheck verify_homomorphism(const LogicalEncoding& enc, int workers = 1);

}  // namespace stabhom
