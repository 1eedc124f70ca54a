#pragma once

#include <charconv>
#include <string>

namespace ofsim {

// Shortest round-trip formatting, locale-independent; the same double always
// produces the same bytes.
inline std::string format_double(double value) {
  char buf[40];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

}  // namespace ofsim
