#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "xtramac/errors.hpp"

namespace xtramac {

// Classification of a raw bit pattern or a decoded operand value.
enum class ValueClass { Normal, Zero, Inf, NaN, Subnormal };

const char* to_string(ValueClass cls);

/// Narrow floating-point layout: 1 sign bit, `exp_bits` exponent bits with
/// bias 2^(exp_bits-1)-1, `mant_bits` stored mantissa bits.
///
/// Special-value policy is per format:
///  - `all_ones_exp_is_special`: an all-ones exponent field encodes NaN
///    (or infinity, see below) instead of a numeric value. Clearing the flag
///    makes the top exponent numeric, which restores layouts where every
///    encoding is finite (then the format has no NaN or infinity at all).
///  - `encodes_infinity`: with a special top exponent, a zero mantissa is
///    +/-infinity; otherwise every special encoding is NaN.
struct FloatFormat {
  std::string name;
  int exp_bits = 0;
  int mant_bits = 0;
  bool encodes_infinity = true;
  bool all_ones_exp_is_special = true;

  int width() const { return 1 + exp_bits + mant_bits; }
  int bias() const { return (1 << (exp_bits - 1)) - 1; }
  // Minimum and maximum unbiased exponents of normal values.
  int min_exp() const { return 1 - bias(); }
  int max_exp() const {
    int top = (1 << exp_bits) - 1;
    if (all_ones_exp_is_special) top -= 1;
    return top - bias();
  }

  std::uint32_t zero_bits(bool negative) const;
  std::uint32_t inf_bits(bool negative) const;   // requires encodes_infinity
  std::uint32_t quiet_nan_bits() const;          // sign 0, top exp, mantissa MSB
  std::uint32_t max_finite_bits(bool negative) const;

  void validate() const;  // throws ConfigError on a malformed layout
};

/// Two's-complement signed integer operand or accumulator.
struct IntFormat {
  std::string name;
  int bits = 0;

  int width() const { return bits; }
  std::int64_t min_value() const { return -(std::int64_t{1} << (bits - 1)); }
  std::int64_t max_value() const { return (std::int64_t{1} << (bits - 1)) - 1; }

  void validate() const;
};

using Format = std::variant<FloatFormat, IntFormat>;

bool is_int(const Format& f);
const std::string& format_name(const Format& f);
/// Width of the raw encoding in bits (float width incl. sign, or int bits).
int encoding_width(const Format& f);
/// Width of the magnitude field a multiplier lane consumes: mantissa bits
/// plus the implicit one for floats, the full two's-complement width for
/// ints (the most negative value's magnitude needs every bit).
int packed_width(const Format& f);
/// Fractional bits carried by the decoded mantissa/magnitude (0 for ints).
int frac_bits(const Format& f);
/// Largest magnitude `packed_width` bits must hold.
std::uint32_t max_packed_magnitude(const Format& f);
int hex_digits(const Format& f);

/// Operand decoded for arithmetic. Subnormal inputs have already been
/// flushed (treated as zero), so `cls` is never Subnormal here.
///  - floats: mantissa includes the implicit leading one; the value is
///    mantissa * 2^(exponent - mant_bits).
///  - ints:   mantissa is the magnitude, exponent is 0.
struct DecodedValue {
  ValueClass cls = ValueClass::Zero;
  bool negative = false;
  int exponent = 0;
  std::uint32_t mantissa = 0;
};

/// Exact dyadic value: (-1)^negative * mag * 2^exp2, or a special class.
/// The magnitude window is wide enough for every intermediate this library
/// produces (products of narrow mantissas plus alignment headroom).
struct ExactValue {
  ValueClass cls = ValueClass::Zero;
  bool negative = false;
  unsigned __int128 mag = 0;
  int exp2 = 0;

  static ExactValue nan() { return {ValueClass::NaN, false, 0, 0}; }
  static ExactValue inf(bool neg) { return {ValueClass::Inf, neg, 0, 0}; }
  static ExactValue zero(bool neg) { return {ValueClass::Zero, neg, 0, 0}; }
  static ExactValue normal(bool neg, unsigned __int128 mag, int exp2) {
    return {ValueClass::Normal, neg, mag, exp2};
  }
};

ExactValue to_exact(const DecodedValue& v, const Format& f);

/// Raw pattern class before any flushing (reports Subnormal).
ValueClass classify(std::uint64_t bits, const Format& f);

/// Decode with denormals-are-zero: subnormal encodings produce a signed Zero.
DecodedValue decode(std::uint64_t bits, const Format& f);
DecodedValue decode(std::uint64_t bits, const FloatFormat& f);
DecodedValue decode(std::uint64_t bits, const IntFormat& f);

/// Round an exact value into `f` with round-to-nearest-even.
/// Results whose rounded exponent falls below the minimum normal flush to
/// signed zero; overflow saturates to +/-infinity when the format encodes
/// it, to quiet NaN when only NaN is encodable, and to max finite otherwise.
std::uint32_t encode(const ExactValue& v, const FloatFormat& f);

/// One multiply-accumulate datatype: A x B + C -> P. The accumulator and
/// product formats always match.
struct MacDatatype {
  std::string id;
  Format type_a;
  Format type_b;
  Format type_c;
  Format type_p;

  bool int_accumulate() const { return is_int(type_p); }
  const FloatFormat& fp_out() const { return std::get<FloatFormat>(type_p); }
  void validate() const;
};

/// Named formats and MAC datatypes, immutable after construction.
class Registry {
 public:
  static Registry standard();

  void add(FloatFormat f);
  void add(IntFormat f);
  void add_datatype(const std::string& id, const std::string& a,
                    const std::string& b, const std::string& c,
                    const std::string& p);

  bool has_format(const std::string& name) const;
  bool has_datatype(const std::string& id) const;
  const Format& format(const std::string& name) const;
  const MacDatatype& datatype(const std::string& id) const;
  const std::vector<Format>& formats() const { return formats_; }
  const std::vector<MacDatatype>& datatypes() const { return datatypes_; }

  std::string to_json() const;                     // pretty-printed
  static Registry from_json(const std::string& text);

 private:
  std::vector<Format> formats_;
  std::vector<MacDatatype> datatypes_;
};

}  // namespace xtramac
