#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>

#include "erepi/error.hpp"

namespace erepi {

// Shortest round-trip decimal form; locale independent.
inline std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  require(ec == std::errc() && ptr == text.data() + text.size(), ErrorKind::Format,
          "not a number: '" + std::string(text) + "'");
  return value;
}

inline std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  require(ec == std::errc() && ptr == text.data() + text.size(), ErrorKind::Format,
          "not an unsigned integer: '" + std::string(text) + "'");
  return value;
}

}  // namespace erepi
