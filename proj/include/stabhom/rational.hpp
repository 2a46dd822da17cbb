#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace stabhom {

// Exact fraction with 64-bit numerator and positive denominator in lowest terms.
// Arithmetic that would overflow throws CapacityError.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  // Closest fraction with denominator at most max_den (continued fractions).
  static Rational approximate(double value, std::int64_t max_den = 1000000);
  // "3", "-3/4" or a decimal such as "0.25".
  static Rational parse(std::string_view text);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_zero() const noexcept { return num_ == 0; }
  bool is_integer() const noexcept { return den_ == 1; }
  int sign() const noexcept { return (num_ > 0) - (num_ < 0); }
  Rational abs() const { return num_ < 0 ? -*this : *this; }

  std::string str() const;  // "3" or "-3/4"

  Rational operator-() const;
  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }

  bool operator==(const Rational& o) const noexcept { return num_ == o.num_ && den_ == o.den_; }
  std::strong_ordering operator<=>(const Rational& o) const noexcept;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::int64_t lcm_checked(std::int64_t a, std::int64_t b);

}  // namespace stabhom
