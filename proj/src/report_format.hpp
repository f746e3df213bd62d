#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <string>

namespace miest::detail {

// Shortest decimal that parses back to the identical double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace miest::detail
