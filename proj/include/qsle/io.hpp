#pragma once

#include <charconv>
#include <string>

namespace qsle {

// Shortest decimal form that reads back to the same double; used in every
// CSV artifact.
inline std::string format_double(double v) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, result.ptr);
}

}  // namespace qsle
