#pragma once

#include <complex>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace stabhom {

using Complex = std::complex<double>;

inline constexpr int kMaxWidth = 12;

enum class Letter : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char letter_char(Letter l);
Letter letter_from_char(char c);  // throws DomainError

// Tensor product of single-qubit Pauli letters times a phase i^k.
//
// Sites are numbered 0..width-1 internally and 1..width in text. Site 0 is the
// most significant bit of a computational basis index, and the x/z masks use the
// same bit layout so that masks can be applied to basis indices directly.
class PauliString {
 public:
  PauliString() = default;
  PauliString(int width, std::uint32_t x_mask, std::uint32_t z_mask, int phase_exp = 0);

  static PauliString identity(int width);
  static PauliString single(int width, int site, Letter letter);
  // Letters only, e.g. "XIZ"; width is the string length.
  static PauliString from_letters(std::string_view letters, int phase_exp = 0);
  // Text form such as "+X1X2", "-Y1Y2", "+iZ3" or "+I". When width is 0 it is
  // inferred as the largest site index mentioned.
  static PauliString parse(std::string_view text, int width = 0);

  int width() const noexcept { return width_; }
  std::uint32_t x_mask() const noexcept { return x_; }
  std::uint32_t z_mask() const noexcept { return z_; }
  // Phase is i^phase_exp with phase_exp in 0..3.
  int phase_exp() const noexcept { return phase_; }
  Complex phase() const;
  bool is_hermitian() const noexcept { return phase_ % 2 == 0; }

  Letter letter(int site) const;
  int weight() const noexcept;
  std::uint32_t support() const noexcept { return x_ | z_; }

  PauliString with_phase(int phase_exp) const;
  PauliString unsigned_copy() const { return with_phase(0); }

  std::string letters() const;  // e.g. "XIY"
  std::string str() const;      // e.g. "+X1Y3"

  bool operator==(const PauliString&) const = default;

 private:
  std::uint32_t bit(int site) const { return 1u << (width_ - 1 - site); }

  int width_ = 0;
  std::uint32_t x_ = 0;
  std::uint32_t z_ = 0;
  int phase_ = 0;
};

PauliString multiply(const PauliString& p, const PauliString& q);
inline PauliString operator*(const PauliString& p, const PauliString& q) { return multiply(p, q); }
bool commutes(const PauliString& p, const PauliString& q);
PauliString tensor(const PauliString& p, const PauliString& q);
Eigen::MatrixXcd to_matrix(const PauliString& p);

// Amplitude picked up by basis state |j> under p: p|j> = amplitude * |j ^ x_mask>.
Complex basis_action(const PauliString& p, std::uint32_t j);
// out = p * in, for vectors of length 2^width.
Eigen::VectorXcd apply(const PauliString& p, const Eigen::VectorXcd& in);

// Ordering used for canonical listings: weight, then site by site with
// X < Y < Z < I, then phase.
bool canonical_less(const PauliString& a, const PauliString& b);

// Real multiple of a phase-free Pauli string.
class SignedPauliTerm {
 public:
  SignedPauliTerm() = default;
  SignedPauliTerm(double coefficient, const PauliString& string);
  // Folds a +/-1 phase into the coefficient; +/-i phases are rejected.
  static SignedPauliTerm from_phased(const PauliString& p);
  static SignedPauliTerm parse(std::string_view text, int width = 0);

  double coefficient() const noexcept { return coefficient_; }
  const PauliString& string() const noexcept { return string_; }
  int width() const noexcept { return string_.width(); }
  // The term as a phased string; requires coefficient +/-1.
  PauliString as_phased() const;

  std::string str() const;

  bool operator==(const SignedPauliTerm&) const = default;

 private:
  double coefficient_ = 1.0;
  PauliString string_;
};

// Real linear combination of phase-free Pauli strings of a common width.
class PauliSum {
 public:
  PauliSum() = default;
  explicit PauliSum(int width) : width_(width) {}

  static PauliSum from_term(const SignedPauliTerm& t);

  int width() const noexcept { return width_; }
  void add(double coefficient, const PauliString& p);  // p may carry a +/-1 phase
  void add(const PauliSum& other, double scale = 1.0);
  PauliSum scaled(double s) const;
  PauliSum pruned(double eps = 1e-12) const;
  bool empty() const noexcept { return terms_.empty(); }
  std::size_t size() const noexcept { return terms_.size(); }

  // Terms in canonical order.
  std::vector<SignedPauliTerm> terms() const;
  double coefficient_of(const PauliString& p) const;
  double one_norm() const;

  Eigen::MatrixXcd to_matrix() const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
  std::string str() const;

 private:
  using Key = std::pair<std::uint32_t, std::uint32_t>;
  int width_ = 0;
  std::map<Key, double> terms_;
};

PauliSum multiply(const PauliSum& a, const PauliSum& b);
PauliSum tensor(const PauliSum& a, const PauliSum& b);

}  // namespace stabhom
