#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace convodiv {

// Fixed, locale-independent float formatting for CSV emission.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace convodiv
