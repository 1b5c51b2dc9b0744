#pragma once

#include <cstdio>
#include <string>

namespace stochq::detail {

// Fixed scientific notation with 12 significant digits.
inline std::string sci(double x) {
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", x);
  return buf;
}

}  // namespace stochq::detail
