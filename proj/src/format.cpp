#include "stabhom/format.hpp"

#include <cstdio>

namespace stabhom {

std::string format_sig9(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of negative zero
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.9g", value);
  return buf;
}

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

}  // namespace stabhom
