#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace curvesec {

/// Shortest decimal string that round-trips the double (<= 17 significant
/// digits). Used for every CSV/JSON/stdout number so reruns are
/// byte-identical.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) return "nan";
  return std::string(buf, res.ptr);
}

}  // namespace curvesec
