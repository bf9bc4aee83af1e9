#pragma once

#include <cstdint>

#include "xtramac/errors.hpp"

namespace xtramac {

// Wide multiplier port geometry: 27-bit and 18-bit unsigned magnitude inputs
// feeding a purely combinational 45-bit product. Signs are handled outside.
inline constexpr int kPortABits = 27;
inline constexpr int kPortBBits = 18;
inline constexpr int kProductBits = kPortABits + kPortBBits;

struct DspPorts {
  std::uint32_t a = 0;  // < 2^27
  std::uint32_t b = 0;  // < 2^18
};

inline std::uint64_t wide_mul(DspPorts p) {
  if (p.a >> kPortABits)
    throw ContractViolation("wide_mul: A port value exceeds 27 bits");
  if (p.b >> kPortBBits)
    throw ContractViolation("wide_mul: B port value exceeds 18 bits");
  return static_cast<std::uint64_t>(p.a) * p.b;
}

}  // namespace xtramac
