#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace rbench {

/// Rounds half away from zero at the given number of decimals.
inline double round_half_away(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

inline std::string fixed(double value, int decimals) {
  const double r = round_half_away(value, decimals);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r == 0.0 ? 0.0 : r);
  return buf;
}

/// Errors are displayed in centimeters with two decimals.
inline std::string format_cm(double cm) { return fixed(cm, 2); }

/// Percentages are displayed with one decimal and a trailing '%'.
inline std::string format_pct(double pct) { return fixed(pct, 1) + "%"; }

}  // namespace rbench
