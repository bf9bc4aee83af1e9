#pragma once

#include <bit>
#include <cstdint>

namespace xtramac::detail {

inline int bit_width_u128(unsigned __int128 v) {
  std::uint64_t hi = static_cast<std::uint64_t>(v >> 64);
  if (hi != 0) return 64 + std::bit_width(hi);
  return std::bit_width(static_cast<std::uint64_t>(v));
}

inline std::uint64_t low_mask64(int bits) {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

}  // namespace xtramac::detail
