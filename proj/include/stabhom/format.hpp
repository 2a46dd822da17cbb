#pragma once

#include <string>

namespace stabhom {

// Nine significant digits with trailing zeros kept, e.g. "2.00000000" or
// "32.0000000". Rounding follows the C library, which rounds the exact binary
// value to nearest with ties to even.
std::string format_sig9(double value);

// Shortest "%.12g" style form for coefficients inside expressions.
std::string format_number(double value);

}  // namespace stabhom
