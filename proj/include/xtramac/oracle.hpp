#pragma once

#include <cstdint>
#include <optional>

#include "xtramac/formats.hpp"

namespace xtramac {

/// Two-rounding semantics (Unfused) round the product into the accumulator
/// format before the addition, matching discrete multiply-then-add hardware.
/// Fused keeps the exact product and rounds once after the addition.
enum class RoundingMode { Unfused, Fused };

/// Exact multiply result before normalization or rounding. For Normal
/// operands the represented value is
///   (-1)^negative * mantissa_product * 2^(exponent - frac_bits)
/// with `exponent` the sum of the operand exponents (an integer operand
/// contributes exponent 0) and `frac_bits` the combined fractional widths.
struct ExactProduct {
  ValueClass cls = ValueClass::Zero;
  bool negative = false;
  std::uint64_t mantissa_product = 0;
  int exponent = 0;
  int frac_bits = 0;

  ExactValue value() const;
};

ExactProduct oracle_mul(const DecodedValue& a, const DecodedValue& b,
                        const MacDatatype& dt);

/// Product mantissa shifted so its leading one sits at bit `width-1`,
/// with the exponent rebased so the value equals
///   mantissa * 2^(exponent - (width-1)).
/// Returns nothing for a zero or special product (callers emit Zero).
struct Normalized {
  std::uint64_t mantissa = 0;
  int exponent = 0;
};
std::optional<Normalized> oracle_normalize(const ExactProduct& p, int width);

/// Exact sum of two finite dyadic values. Exact cancellation yields +0;
/// a zero operand is the addition identity apart from the signed-zero rule
/// (-0 survives only when both addends are -0).
ExactValue exact_add(const ExactValue& x, const ExactValue& y);

/// Golden multiply-accumulate on raw bit patterns: decodes under `dt`
/// (subnormal inputs flush to zero), resolves special values, and returns
/// the accumulator-format result pattern.
std::uint32_t oracle_mac(std::uint64_t a_bits, std::uint64_t b_bits,
                         std::uint64_t c_bits, const MacDatatype& dt,
                         RoundingMode mode = RoundingMode::Unfused);

}  // namespace xtramac
