#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>

namespace easyo::csv {

// Shortest round-trip representation; identical bytes for identical doubles.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string num(std::uint64_t v) { return std::to_string(v); }
inline std::string num(std::int64_t v) { return std::to_string(v); }
inline std::string num(int v) { return std::to_string(v); }

}  // namespace easyo::csv
