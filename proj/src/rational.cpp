#include "stabhom/rational.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "stabhom/errors.hpp"

namespace stabhom {

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < -std::numeric_limits<std::int64_t>::max()) {
    throw CapacityError("rational arithmetic overflow");
  }
  return static_cast<std::int64_t>(v);
}

Rational make(i128 num, i128 den) {
  if (den == 0) throw DomainError("division by zero");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 a = num < 0 ? -num : num, b = den;
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  return Rational(narrow(num), narrow(den));
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw DomainError("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = g > 1 ? num / g : num;
  den_ = g > 1 ? den / g : den;
}

Rational Rational::approximate(double value, std::int64_t max_den) {
  if (!std::isfinite(value)) throw DomainError("cannot approximate a non-finite value");
  if (std::abs(value) > 1e15) throw CapacityError("value too large for a rational approximation");
  const bool negative = value < 0;
  double x = std::abs(value);
  // Convergents p/q of the continued fraction, keeping the best one with q <= max_den.
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_d = std::floor(frac);
    const auto a = static_cast<std::int64_t>(a_d);
    const std::int64_t q2 = a * q1 + q0;
    if (q2 > max_den) {
      // Best semiconvergent within the denominator limit.
      const std::int64_t k = (max_den - q0) / q1;
      const std::int64_t ps = k * p1 + p0, qs = k * q1 + q0;
      if (k > 0 && std::abs(static_cast<double>(ps) / qs - x) < std::abs(static_cast<double>(p1) / q1 - x)) {
        p1 = ps;
        q1 = qs;
      }
      break;
    }
    const std::int64_t p2 = a * p1 + p0;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double rem = frac - a_d;
    if (rem < 1e-15 || std::abs(static_cast<double>(p1) / q1 - x) < 1e-15 * std::max(1.0, x)) break;
    frac = 1.0 / rem;
  }
  return Rational(negative ? -p1 : p1, q1);
}

Rational Rational::parse(std::string_view text) {
  const std::string t(text);
  if (t.empty()) throw DomainError("empty number");
  const auto slash = t.find('/');
  auto is_int = [](const std::string& s) {
    std::size_t k = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
    if (k >= s.size()) return false;
    for (; k < s.size(); ++k) {
      if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
    }
    return true;
  };
  if (slash != std::string::npos) {
    const std::string a = t.substr(0, slash), b = t.substr(slash + 1);
    if (!is_int(a) || !is_int(b)) throw DomainError("malformed fraction '" + t + "'");
    return Rational(std::stoll(a), std::stoll(b));
  }
  if (is_int(t)) return Rational(std::stoll(t), 1);
  std::size_t used = 0;
  const double v = std::stod(t, &used);
  if (used != t.size()) throw DomainError("malformed number '" + t + "'");
  return approximate(v);
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::operator-() const { return make(-static_cast<i128>(num_), den_); }

Rational Rational::operator+(const Rational& o) const {
  return make(static_cast<i128>(num_) * o.den_ + static_cast<i128>(o.num_) * den_, static_cast<i128>(den_) * o.den_);
}

Rational Rational::operator-(const Rational& o) const { return *this + (-o); }

Rational Rational::operator*(const Rational& o) const {
  return make(static_cast<i128>(num_) * o.num_, static_cast<i128>(den_) * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
  if (o.num_ == 0) throw DomainError("division by zero");
  return make(static_cast<i128>(num_) * o.den_, static_cast<i128>(den_) * o.num_);
}

std::strong_ordering Rational::operator<=>(const Rational& o) const noexcept {
  const i128 l = static_cast<i128>(num_) * o.den_;
  const i128 r = static_cast<i128>(o.num_) * den_;
  if (l < r) return std::strong_ordering::less;
  if (l > r) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::int64_t lcm_checked(std::int64_t a, std::int64_t b) {
  const std::int64_t g = std::gcd(a, b);
  return narrow(static_cast<i128>(a / g) * b);
}

}  // namespace stabhom
