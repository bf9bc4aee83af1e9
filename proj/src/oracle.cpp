#include "xtramac/oracle.hpp"

#include <algorithm>

#include "xtramac/detail/bits.hpp"

namespace xtramac {

using detail::bit_width_u128;

ExactValue ExactProduct::value() const {
  if (cls != ValueClass::Normal) return {cls, negative, 0, 0};
  return ExactValue::normal(negative, mantissa_product, exponent - frac_bits);
}

ExactProduct oracle_mul(const DecodedValue& a, const DecodedValue& b,
                        const MacDatatype& dt) {
  bool neg = a.negative != b.negative;
  if (a.cls == ValueClass::NaN || b.cls == ValueClass::NaN)
    return {ValueClass::NaN, false, 0, 0, 0};
  if ((a.cls == ValueClass::Inf && b.cls == ValueClass::Zero) ||
      (b.cls == ValueClass::Inf && a.cls == ValueClass::Zero))
    return {ValueClass::NaN, false, 0, 0, 0};
  if (a.cls == ValueClass::Inf || b.cls == ValueClass::Inf)
    return {ValueClass::Inf, neg, 0, 0, 0};
  if (a.cls == ValueClass::Zero || b.cls == ValueClass::Zero)
    return {ValueClass::Zero, neg, 0, 0, 0};
  return {ValueClass::Normal, neg,
          static_cast<std::uint64_t>(a.mantissa) * b.mantissa,
          a.exponent + b.exponent, frac_bits(dt.type_a) + frac_bits(dt.type_b)};
}

std::optional<Normalized> oracle_normalize(const ExactProduct& p, int width) {
  if (p.cls != ValueClass::Normal || p.mantissa_product == 0) return std::nullopt;
  if (width < 1 || width > 63)
    throw ContractViolation("oracle_normalize: width out of range");
  int len = bit_width_u128(p.mantissa_product);
  if (len > width)
    throw ContractViolation("oracle_normalize: product wider than frame");
  int delta = width - len;
  return Normalized{p.mantissa_product << delta,
                    p.exponent - p.frac_bits + (width - 1) - delta};
}

ExactValue exact_add(const ExactValue& x, const ExactValue& y) {
  if (x.cls == ValueClass::Zero && y.cls == ValueClass::Zero)
    return ExactValue::zero(x.negative && y.negative);
  if (x.cls == ValueClass::Zero) return y;
  if (y.cls == ValueClass::Zero) return x;
  if (x.cls != ValueClass::Normal || y.cls != ValueClass::Normal)
    throw ContractViolation("exact_add: finite operands required");

  const ExactValue& hi = x.exp2 >= y.exp2 ? x : y;
  const ExactValue& lo = x.exp2 >= y.exp2 ? y : x;
  int gap = hi.exp2 - lo.exp2;

  const int hi_width = bit_width_u128(hi.mag);
  if (gap + hi_width > 120) {
    // The low addend is many orders of magnitude below the high one; it can
    // only matter as a tie-breaker. Nudge the high value in the right
    // direction instead of aligning. The nudge must sit strictly below the
    // rounding position of any later encode, so widen the magnitude to at
    // least 40 bits (covering precisions up to 37); it must also stay
    // strictly larger than the folded addend, which bounds the shift by the
    // exponent gap less the low magnitude's width.
    const int lo_width = bit_width_u128(lo.mag);
    const int shift = std::min({std::max(2, 40 - hi_width),
                                gap - lo_width, 126 - hi_width});
    if (shift < 2)
      throw ContractViolation("exact_add: operands too wide to combine");
    unsigned __int128 mag =
        (hi.mag << shift) + (hi.negative == lo.negative ? 1 : -1);
    return ExactValue::normal(hi.negative, mag, hi.exp2 - shift);
  }

  unsigned __int128 hm = hi.mag << gap;
  unsigned __int128 lm = lo.mag;
  if (hi.negative == lo.negative)
    return ExactValue::normal(hi.negative, hm + lm, lo.exp2);
  if (hm == lm) return ExactValue::zero(false);  // exact cancellation
  if (hm > lm) return ExactValue::normal(hi.negative, hm - lm, lo.exp2);
  return ExactValue::normal(lo.negative, lm - hm, lo.exp2);
}

namespace {

std::int64_t clamp_to(const IntFormat& f, std::int64_t v) {
  return std::clamp(v, f.min_value(), f.max_value());
}

std::uint32_t int_mac(const DecodedValue& a, const DecodedValue& b,
                      const DecodedValue& c, const MacDatatype& dt) {
  const IntFormat& out = std::get<IntFormat>(dt.type_p);
  std::int64_t prod = static_cast<std::int64_t>(a.mantissa) * b.mantissa;
  if (a.negative != b.negative) prod = -prod;
  std::int64_t acc = c.negative ? -static_cast<std::int64_t>(c.mantissa)
                                : static_cast<std::int64_t>(c.mantissa);
  std::int64_t sum = clamp_to(out, acc + prod);
  return static_cast<std::uint32_t>(sum) & static_cast<std::uint32_t>(
             detail::low_mask64(out.bits));
}

}  // namespace

std::uint32_t oracle_mac(std::uint64_t a_bits, std::uint64_t b_bits,
                         std::uint64_t c_bits, const MacDatatype& dt,
                         RoundingMode mode) {
  DecodedValue a = decode(a_bits, dt.type_a);
  DecodedValue b = decode(b_bits, dt.type_b);
  DecodedValue c = decode(c_bits, dt.type_c);

  if (dt.int_accumulate()) return int_mac(a, b, c, dt);

  const FloatFormat& out = dt.fp_out();
  ExactProduct p = oracle_mul(a, b, dt);

  if (p.cls == ValueClass::NaN || c.cls == ValueClass::NaN)
    return out.quiet_nan_bits();

  ExactValue pv = p.value();
  if (mode == RoundingMode::Unfused && pv.cls == ValueClass::Normal) {
    // Round the product into the accumulator format first; this may
    // saturate to infinity or flush to zero before the addition happens.
    pv = to_exact(decode(encode(pv, out), out), dt.type_p);
    if (pv.cls == ValueClass::NaN) return out.quiet_nan_bits();
  }

  if (pv.cls == ValueClass::Inf) {
    if (c.cls == ValueClass::Inf && c.negative != pv.negative)
      return out.quiet_nan_bits();
    return out.inf_bits(pv.negative);
  }
  if (c.cls == ValueClass::Inf) return out.inf_bits(c.negative);

  return encode(exact_add(pv, to_exact(c, dt.type_c)), out);
}

}  // namespace xtramac
