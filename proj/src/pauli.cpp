#include "stabhom/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <sstream>

#include "stabhom/errors.hpp"
#include "stabhom/format.hpp"
#include "stabhom/tolerances.hpp"

namespace stabhom {

namespace {

void check_width(int width) {
  if (width < 1) throw DomainError("Pauli string width must be at least 1");
  if (width > kMaxWidth) {
    throw CapacityError("Pauli string width " + std::to_string(width) + " exceeds the cap of " +
                        std::to_string(kMaxWidth));
  }
}

void check_same_width(const PauliString& p, const PauliString& q) {
  if (p.width() != q.width()) {
    throw DimensionError("Pauli string widths differ: " + std::to_string(p.width()) + " vs " +
                         std::to_string(q.width()));
  }
}

const Complex kPhases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

}  // namespace

char letter_char(Letter l) {
  switch (l) {
    case Letter::I: return 'I';
    case Letter::X: return 'X';
    case Letter::Y: return 'Y';
    case Letter::Z: return 'Z';
  }
  return '?';
}

Letter letter_from_char(char c) {
  switch (c) {
    case 'I': return Letter::I;
    case 'X': return Letter::X;
    case 'Y': return Letter::Y;
    case 'Z': return Letter::Z;
    default: throw DomainError(std::string("not a Pauli letter: '") + c + "'");
  }
}

PauliString::PauliString(int width, std::uint32_t x_mask, std::uint32_t z_mask, int phase_exp)
    : width_(width), x_(x_mask), z_(z_mask), phase_(((phase_exp % 4) + 4) % 4) {
  check_width(width);
  const std::uint32_t full = (width == 32) ? ~0u : ((1u << width) - 1u);
  if ((x_mask | z_mask) & ~full) throw DomainError("Pauli mask has bits outside the string width");
}

PauliString PauliString::identity(int width) { return PauliString(width, 0, 0, 0); }

PauliString PauliString::single(int width, int site, Letter letter) {
  check_width(width);
  if (site < 0 || site >= width) throw DomainError("site index out of range");
  const std::uint32_t b = 1u << (width - 1 - site);
  const bool x = letter == Letter::X || letter == Letter::Y;
  const bool z = letter == Letter::Z || letter == Letter::Y;
  return PauliString(width, x ? b : 0, z ? b : 0, 0);
}

PauliString PauliString::from_letters(std::string_view letters, int phase_exp) {
  const int width = static_cast<int>(letters.size());
  check_width(width);
  std::uint32_t x = 0, z = 0;
  for (int s = 0; s < width; ++s) {
    const Letter l = letter_from_char(letters[s]);
    const std::uint32_t b = 1u << (width - 1 - s);
    if (l == Letter::X || l == Letter::Y) x |= b;
    if (l == Letter::Z || l == Letter::Y) z |= b;
  }
  return PauliString(width, x, z, phase_exp);
}

PauliString PauliString::parse(std::string_view text, int width) {
  std::size_t pos = 0;
  int phase = 0;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    if (text[pos] == '-') phase = 2;
    ++pos;
  }
  if (pos < text.size() && text[pos] == 'i') {
    phase += 1;
    ++pos;
  }
  std::vector<std::pair<int, Letter>> sites;
  bool bare_identity = false;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const char c = text[pos];
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
      throw ParseError(std::string("expected a Pauli letter, found '") + c + "'", pos);
    }
    ++pos;
    std::size_t digits = pos;
    while (digits < text.size() && std::isdigit(static_cast<unsigned char>(text[digits]))) ++digits;
    if (digits == pos) {
      if (c == 'I' && pos == text.size() && sites.empty()) {
        bare_identity = true;
        break;
      }
      throw ParseError("expected a site index after the letter", pos);
    }
    const int site = std::stoi(std::string(text.substr(pos, digits - pos)));
    if (site < 1) throw ParseError("site indices start at 1", pos);
    if (!sites.empty() && site <= sites.back().first) {
      throw ParseError("site indices must be strictly increasing", start);
    }
    sites.emplace_back(site, letter_from_char(c));
    pos = digits;
  }
  if (sites.empty() && !bare_identity) throw ParseError("empty Pauli string", pos);
  const int max_site = sites.empty() ? 1 : sites.back().first;
  if (width == 0) width = max_site;
  if (max_site > width) {
    throw DimensionError("site " + std::to_string(max_site) + " exceeds width " + std::to_string(width));
  }
  check_width(width);
  std::uint32_t x = 0, z = 0;
  for (auto [site, l] : sites) {
    const std::uint32_t b = 1u << (width - site);
    if (l == Letter::X || l == Letter::Y) x |= b;
    if (l == Letter::Z || l == Letter::Y) z |= b;
  }
  return PauliString(width, x, z, phase);
}

Complex PauliString::phase() const { return kPhases[phase_]; }

Letter PauliString::letter(int site) const {
  if (site < 0 || site >= width_) throw DomainError("site index out of range");
  const bool x = x_ & bit(site);
  const bool z = z_ & bit(site);
  if (x && z) return Letter::Y;
  if (x) return Letter::X;
  if (z) return Letter::Z;
  return Letter::I;
}

int PauliString::weight() const noexcept { return std::popcount(x_ | z_); }

PauliString PauliString::with_phase(int phase_exp) const { return PauliString(width_, x_, z_, phase_exp); }

std::string PauliString::letters() const {
  std::string out;
  out.reserve(width_);
  for (int s = 0; s < width_; ++s) out.push_back(letter_char(letter(s)));
  return out;
}

std::string PauliString::str() const {
  static const char* kPrefix[4] = {"+", "+i", "-", "-i"};
  std::string out = kPrefix[phase_];
  if (weight() == 0) return out + "I";
  for (int s = 0; s < width_; ++s) {
    const Letter l = letter(s);
    if (l == Letter::I) continue;
    out.push_back(letter_char(l));
    out += std::to_string(s + 1);
  }
  return out;
}

PauliString multiply(const PauliString& p, const PauliString& q) {
  check_same_width(p, q);
  // Single-site products: XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i.
  static const int kExp[4][4] = {
      {0, 0, 0, 0},
      {0, 0, 1, 3},
      {0, 3, 0, 1},
      {0, 1, 3, 0},
  };
  int phase = p.phase_exp() + q.phase_exp();
  for (int s = 0; s < p.width(); ++s) {
    phase += kExp[static_cast<int>(p.letter(s))][static_cast<int>(q.letter(s))];
  }
  return PauliString(p.width(), p.x_mask() ^ q.x_mask(), p.z_mask() ^ q.z_mask(), phase);
}

bool commutes(const PauliString& p, const PauliString& q) {
  check_same_width(p, q);
  const std::uint32_t anti = (p.x_mask() & q.z_mask()) ^ (p.z_mask() & q.x_mask());
  return std::popcount(anti) % 2 == 0;
}

PauliString tensor(const PauliString& p, const PauliString& q) {
  const int width = p.width() + q.width();
  check_width(width);
  return PauliString(width, (p.x_mask() << q.width()) | q.x_mask(), (p.z_mask() << q.width()) | q.z_mask(),
                     p.phase_exp() + q.phase_exp());
}

Complex basis_action(const PauliString& p, std::uint32_t j) {
  const int y_count = std::popcount(p.x_mask() & p.z_mask());
  const int sign_flips = std::popcount(j & p.z_mask());
  return kPhases[(p.phase_exp() + y_count + 2 * sign_flips) % 4];
}

Eigen::MatrixXcd to_matrix(const PauliString& p) {
  const std::size_t dim = std::size_t{1} << p.width();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::uint32_t j = 0; j < dim; ++j) m(j ^ p.x_mask(), j) = basis_action(p, j);
  return m;
}

Eigen::VectorXcd apply(const PauliString& p, const Eigen::VectorXcd& in) {
  const std::size_t dim = std::size_t{1} << p.width();
  if (static_cast<std::size_t>(in.size()) != dim) throw DimensionError("vector length does not match 2^width");
  Eigen::VectorXcd out(dim);
  const int y_count = std::popcount(p.x_mask() & p.z_mask());
  for (std::uint32_t j = 0; j < dim; ++j) {
    out(j ^ p.x_mask()) = kPhases[(p.phase_exp() + y_count + 2 * std::popcount(j & p.z_mask())) % 4] * in(j);
  }
  return out;
}

bool canonical_less(const PauliString& a, const PauliString& b) {
  if (a.width() != b.width()) return a.width() < b.width();
  if (a.weight() != b.weight()) return a.weight() < b.weight();
  // Per-site comparison with X < Y < Z < I, so strings supported on earlier
  // sites come first among strings of equal weight.
  static const int kRank[4] = {3, 0, 1, 2};
  for (int s = 0; s < a.width(); ++s) {
    const int ra = kRank[static_cast<int>(a.letter(s))];
    const int rb = kRank[static_cast<int>(b.letter(s))];
    if (ra != rb) return ra < rb;
  }
  return a.phase_exp() < b.phase_exp();
}

SignedPauliTerm::SignedPauliTerm(double coefficient, const PauliString& string)
    : coefficient_(coefficient), string_(string) {
  if (!std::isfinite(coefficient) || coefficient == 0.0) {
    throw DomainError("Pauli term coefficient must be finite and nonzero");
  }
  if (string.phase_exp() != 0) throw DomainError("Pauli term string must be phase-free");
}

SignedPauliTerm SignedPauliTerm::from_phased(const PauliString& p) {
  if (!p.is_hermitian()) throw DomainError("string with phase +/-i is not Hermitian: " + p.str());
  return SignedPauliTerm(p.phase_exp() == 0 ? 1.0 : -1.0, p.unsigned_copy());
}

SignedPauliTerm SignedPauliTerm::parse(std::string_view text, int width) {
  return from_phased(PauliString::parse(text, width));
}

PauliString SignedPauliTerm::as_phased() const {
  if (coefficient_ == 1.0) return string_;
  if (coefficient_ == -1.0) return string_.with_phase(2);
  throw DomainError("term coefficient is not +/-1");
}

std::string SignedPauliTerm::str() const {
  std::string body = string_.str().substr(1);
  const char sign = coefficient_ < 0 ? '-' : '+';
  const double mag = std::abs(coefficient_);
  if (mag == 1.0) return sign + body;
  return sign + format_number(mag) + "*" + body;
}

PauliSum PauliSum::from_term(const SignedPauliTerm& t) {
  PauliSum s(t.width());
  s.add(t.coefficient(), t.string());
  return s;
}

void PauliSum::add(double coefficient, const PauliString& p) {
  if (width_ == 0) width_ = p.width();
  if (p.width() != width_) throw DimensionError("Pauli sum width mismatch");
  if (!p.is_hermitian()) throw DomainError("Pauli sum terms must be Hermitian");
  const double c = p.phase_exp() == 2 ? -coefficient : coefficient;
  const Key k{p.x_mask(), p.z_mask()};
  auto it = terms_.find(k);
  if (it == terms_.end()) {
    if (c != 0.0) terms_.emplace(k, c);
    return;
  }
  it->second += c;
  if (it->second == 0.0) terms_.erase(it);
}

void PauliSum::add(const PauliSum& other, double scale) {
  if (other.empty()) return;
  if (width_ == 0) width_ = other.width_;
  if (other.width_ != width_) throw DimensionError("Pauli sum width mismatch");
  for (const auto& [k, c] : other.terms_) add(scale * c, PauliString(width_, k.first, k.second, 0));
}

PauliSum PauliSum::scaled(double s) const {
  PauliSum out(width_);
  for (const auto& [k, c] : terms_) {
    if (c * s != 0.0) out.terms_.emplace(k, c * s);
  }
  return out;
}

PauliSum PauliSum::pruned(double eps) const {
  PauliSum out(width_);
  for (const auto& [k, c] : terms_) {
    if (std::abs(c) > eps) out.terms_.emplace(k, c);
  }
  return out;
}

std::vector<SignedPauliTerm> PauliSum::terms() const {
  std::vector<SignedPauliTerm> out;
  out.reserve(terms_.size());
  for (const auto& [k, c] : terms_) out.emplace_back(c, PauliString(width_, k.first, k.second, 0));
  std::sort(out.begin(), out.end(),
            [](const SignedPauliTerm& a, const SignedPauliTerm& b) { return canonical_less(a.string(), b.string()); });
  return out;
}

double PauliSum::coefficient_of(const PauliString& p) const {
  auto it = terms_.find({p.x_mask(), p.z_mask()});
  if (it == terms_.end()) return 0.0;
  return p.phase_exp() == 2 ? -it->second : it->second;
}

double PauliSum::one_norm() const {
  double s = 0.0;
  for (const auto& [k, c] : terms_) s += std::abs(c);
  return s;
}

Eigen::MatrixXcd PauliSum::to_matrix() const {
  if (width_ == 0) throw DomainError("empty Pauli sum has no width");
  const std::size_t dim = std::size_t{1} << width_;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [k, c] : terms_) {
    const PauliString p(width_, k.first, k.second, 0);
    for (std::uint32_t j = 0; j < dim; ++j) m(j ^ k.first, j) += c * basis_action(p, j);
  }
  return m;
}

Eigen::VectorXcd PauliSum::apply(const Eigen::VectorXcd& v) const {
  const std::size_t dim = std::size_t{1} << width_;
  if (static_cast<std::size_t>(v.size()) != dim) throw DimensionError("vector length does not match 2^width");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
  for (const auto& [k, c] : terms_) {
    const int y_count = std::popcount(k.first & k.second);
    for (std::uint32_t j = 0; j < dim; ++j) {
      out(j ^ k.first) += c * kPhases[(y_count + 2 * std::popcount(j & k.second)) % 4] * v(j);
    }
  }
  return out;
}

std::string PauliSum::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const auto& t : terms()) {
    if (!out.empty()) out += " ";
    out += t.str();
  }
  return out;
}

PauliSum multiply(const PauliSum& a, const PauliSum& b) {
  if (a.width() != b.width()) throw DimensionError("Pauli sum width mismatch");
  std::map<std::pair<std::uint32_t, std::uint32_t>, Complex> acc;
  for (const auto& ta : a.terms()) {
    for (const auto& tb : b.terms()) {
      const PauliString p = multiply(ta.string(), tb.string());
      acc[{p.x_mask(), p.z_mask()}] += ta.coefficient() * tb.coefficient() * p.phase();
    }
  }
  PauliSum out(a.width());
  for (const auto& [k, c] : acc) {
    if (std::abs(c.imag()) > tol::kPrune) throw DomainError("product of Pauli sums is not Hermitian");
    if (std::abs(c.real()) > tol::kPrune) out.add(c.real(), PauliString(a.width(), k.first, k.second, 0));
  }
  return out;
}

PauliSum tensor(const PauliSum& a, const PauliSum& b) {
  PauliSum out(a.width() + b.width());
  for (const auto& ta : a.terms()) {
    for (const auto& tb : b.terms()) {
      out.add(ta.coefficient() * tb.coefficient(), tensor(ta.string(), tb.string()));
    }
  }
  return out;
}

}  // namespace stabhom
