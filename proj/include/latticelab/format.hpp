#pragma once

#include <cstdio>
#include <string>

namespace latticelab {

/// Shortest round-trip-safe text form of a double (17 significant digits).
inline std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace latticelab
