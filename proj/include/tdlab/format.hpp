#pragma once
// Locale-independent number formatting for CSV and SVG output. Everything
// goes through std::to_chars so reruns are byte-identical and '.' is always
// the decimal separator.

#include <charconv>
#include <string>

namespace tdlab {

/// Shortest decimal string that round-trips the double (to_chars default).
inline std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Fixed-point with the given number of digits after the point.
inline std::string fmt_fixed(double v, int digits) {
  char buf[64];
  auto res =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed,
                    digits);
  return std::string(buf, res.ptr);
}

inline std::string fmt(long v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }

}  // namespace tdlab
