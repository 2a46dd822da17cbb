#pragma once

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "stabhom/pauli.hpp"
#include "stabhom/rational.hpp"

namespace stabhom {

// A measurement setting such as A1, A2' or the fixed Pauli X3. Sites start at 1.
struct SettingSymbol {
  int site = 1;
  char base = 'A';
  int primes = 0;

  // X, Y or Z without primes names a fixed Pauli observable.
  bool is_fixed_pauli() const noexcept { return primes == 0 && (base == 'X' || base == 'Y' || base == 'Z'); }
  std::string str() const;
  static SettingSymbol parse(std::string_view text);

  auto operator<=>(const SettingSymbol&) const = default;
};

// Settings on distinct sites, sorted by site. The empty monomial is the constant 1.
using Monomial = std::vector<SettingSymbol>;

struct LinearTerm {
  Rational coefficient;
  Monomial monomial;
  bool operator==(const LinearTerm&) const = default;
};

struct SquareTerm {
  Rational coefficient;
  std::vector<LinearTerm> inner;
  bool operator==(const SquareTerm&) const = default;
};

enum class Relation { LessEqual, Less };

// sum_k c_k m_k + sum_j d_j (sum_l e_jl m_jl)^2  rel  bound
struct InequalityAST {
  std::vector<LinearTerm> linear;
  std::vector<SquareTerm> squares;
  Relation relation = Relation::LessEqual;
  std::optional<Rational> bound;

  bool is_linear() const noexcept { return squares.empty(); }
  int max_site() const;
  std::set<SettingSymbol> settings() const;
  InequalityAST linear_part() const;

  bool operator==(const InequalityAST&) const = default;
};

struct Inequality {
  InequalityAST ast;
  std::string name;
  std::string provenance;
};

// Parses `.ineq` content: '#' comments, optional "name:" and "provenance:" header
// lines, then the inequality (possibly spread over several lines).
Inequality parse(std::string_view text);
// An expression without relation or bound.
InequalityAST parse_expression(std::string_view text);

InequalityAST canonicalize(const InequalityAST& ast);
// Canonical expression text without relation and bound.
std::string format_expression(const InequalityAST& ast);
// Canonical text; includes " <= bound" when a bound is present.
std::string pretty_print(const InequalityAST& ast);
std::string to_ineq_file(const Inequality& ineq);

// Minimal canonical text over all relabelings that permute the settings within a
// site and flip the sign of any setting. Throws CapacityError when the group is
// larger than two million elements.
std::string canonical_up_to_relabeling(const InequalityAST& ast);
bool equivalent_up_to_relabeling(const InequalityAST& a, const InequalityAST& b);

// A dichotomic qubit observable n.(X, Y, Z) with |n| = 1.
struct LocalObservable {
  std::array<double, 3> bloch{1.0, 0.0, 0.0};

  static LocalObservable pauli(Letter letter, int sign = 1);
  // "X", "-Y", "(X+Z)/sqrt2", "(X-Y)/sqrt2", "bloch(0.6,0,-0.8)".
  static LocalObservable parse(std::string_view text);
  static LocalObservable from_bloch(std::array<double, 3> v);  // normalizes

  // Axis-aligned observables give the letter and sign.
  std::optional<std::pair<Letter, int>> as_pauli() const;
  std::string str() const;
  Eigen::Matrix2cd matrix() const;
  PauliSum on_site(int width, int site_index) const;  // site_index is 0-based

  bool operator==(const LocalObservable&) const = default;
};

using Assignment = std::map<SettingSymbol, LocalObservable>;

// "A1=X;A1'=(X+Y)/sqrt2;A2=-Y" (separators ';' or ',').
Assignment parse_assignment(std::string_view text);
std::string format_assignment(const Assignment& a);

// Operator realization of an inequality's left-hand side.
struct OperatorExpression {
  struct Square {
    double coefficient;
    PauliSum inner;
  };
  int width = 0;
  PauliSum linear;
  std::vector<Square> squares;

  bool is_linear() const noexcept { return squares.empty(); }
  // <linear> + sum_j c_j <inner_j>^2 on a unit vector.
  double value(const Eigen::VectorXcd& psi) const;
};

// Every symbolic setting needs an entry; fixed Pauli settings default to
// themselves. width 0 means the largest site in the expression.
OperatorExpression assign_paulis(const InequalityAST& ast, const Assignment& assignment, int width = 0);

PauliSum realize_terms(const std::vector<LinearTerm>& terms, const Assignment& assignment, int width);

}  // namespace stabhom
