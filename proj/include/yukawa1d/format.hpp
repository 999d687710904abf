#ifndef YUKAWA1D_FORMAT_HPP
#define YUKAWA1D_FORMAT_HPP

#include <array>
#include <charconv>
#include <string>

namespace yukawa1d {

/// Shortest round-trip is not guaranteed across libraries; a fixed 17
/// significant digits is, and keeps output byte-stable.
inline std::string format_double(double v)
{
  std::array<char, 32> buf{};
  auto const res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

} // namespace yukawa1d

#endif
