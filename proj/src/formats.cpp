#include "xtramac/formats.hpp"

#include <json.hpp>

#include "xtramac/detail/bits.hpp"

namespace xtramac {

using detail::bit_width_u128;
using detail::low_mask64;

const char* to_string(ValueClass cls) {
  switch (cls) {
    case ValueClass::Normal: return "normal";
    case ValueClass::Zero: return "zero";
    case ValueClass::Inf: return "inf";
    case ValueClass::NaN: return "nan";
    case ValueClass::Subnormal: return "subnormal";
  }
  return "?";
}

std::uint32_t FloatFormat::zero_bits(bool negative) const {
  return negative ? (1u << (width() - 1)) : 0u;
}

std::uint32_t FloatFormat::inf_bits(bool negative) const {
  std::uint32_t exp_all = (1u << exp_bits) - 1;
  return zero_bits(negative) | (exp_all << mant_bits);
}

std::uint32_t FloatFormat::quiet_nan_bits() const {
  std::uint32_t exp_all = (1u << exp_bits) - 1;
  return (exp_all << mant_bits) | (1u << (mant_bits - 1));
}

std::uint32_t FloatFormat::max_finite_bits(bool negative) const {
  std::uint32_t top = (1u << exp_bits) - 1;
  if (all_ones_exp_is_special) top -= 1;
  std::uint32_t mant_all = (1u << mant_bits) - 1;
  return zero_bits(negative) | (top << mant_bits) | mant_all;
}

void FloatFormat::validate() const {
  if (name.empty()) throw ConfigError("float format needs a name");
  if (exp_bits < 2 || mant_bits < 1)
    throw ConfigError("float format " + name + ": exp_bits >= 2 and mant_bits >= 1 required");
  int w = width();
  if (w != 4 && w != 8 && w != 16 && w != 32)
    throw ConfigError("float format " + name + ": width must be 4, 8, 16 or 32 bits");
  if (encodes_infinity && !all_ones_exp_is_special)
    throw ConfigError("float format " + name + ": infinity requires a special top exponent");
}

void IntFormat::validate() const {
  if (name.empty()) throw ConfigError("int format needs a name");
  if (bits < 2 || bits > 32)
    throw ConfigError("int format " + name + ": 2..8 bit multiplicands and a 32-bit accumulator are supported");
}

bool is_int(const Format& f) { return std::holds_alternative<IntFormat>(f); }

const std::string& format_name(const Format& f) {
  return is_int(f) ? std::get<IntFormat>(f).name : std::get<FloatFormat>(f).name;
}

int encoding_width(const Format& f) {
  return is_int(f) ? std::get<IntFormat>(f).width() : std::get<FloatFormat>(f).width();
}

int packed_width(const Format& f) {
  return is_int(f) ? std::get<IntFormat>(f).bits
                   : std::get<FloatFormat>(f).mant_bits + 1;
}

int frac_bits(const Format& f) {
  return is_int(f) ? 0 : std::get<FloatFormat>(f).mant_bits;
}

std::uint32_t max_packed_magnitude(const Format& f) {
  if (is_int(f))
    return 1u << (std::get<IntFormat>(f).bits - 1);  // |min_value|
  return (1u << (std::get<FloatFormat>(f).mant_bits + 1)) - 1;
}

int hex_digits(const Format& f) { return (encoding_width(f) + 3) / 4; }

ExactValue to_exact(const DecodedValue& v, const Format& f) {
  if (v.cls != ValueClass::Normal)
    return {v.cls, v.negative, 0, 0};
  return ExactValue::normal(v.negative, v.mantissa, v.exponent - frac_bits(f));
}

namespace {

void check_pattern_width(std::uint64_t bits, int width, const std::string& name) {
  if (width < 64 && (bits >> width) != 0)
    throw ConfigError("bit pattern wider than " + std::to_string(width) +
                      "-bit format " + name);
}

}  // namespace

ValueClass classify(std::uint64_t bits, const Format& f) {
  if (is_int(f)) {
    const IntFormat& i = std::get<IntFormat>(f);
    check_pattern_width(bits, i.bits, i.name);
    return bits == 0 ? ValueClass::Zero : ValueClass::Normal;
  }
  const FloatFormat& ff = std::get<FloatFormat>(f);
  check_pattern_width(bits, ff.width(), ff.name);
  std::uint32_t exp_all = (1u << ff.exp_bits) - 1;
  std::uint32_t e = (static_cast<std::uint32_t>(bits) >> ff.mant_bits) & exp_all;
  std::uint32_t m = static_cast<std::uint32_t>(bits) & ((1u << ff.mant_bits) - 1);
  if (ff.all_ones_exp_is_special && e == exp_all) {
    if (ff.encodes_infinity && m == 0) return ValueClass::Inf;
    return ValueClass::NaN;
  }
  if (e == 0) return m == 0 ? ValueClass::Zero : ValueClass::Subnormal;
  return ValueClass::Normal;
}

DecodedValue decode(std::uint64_t bits, const FloatFormat& f) {
  check_pattern_width(bits, f.width(), f.name);
  std::uint32_t b = static_cast<std::uint32_t>(bits);
  bool neg = (b >> (f.width() - 1)) & 1u;
  std::uint32_t exp_all = (1u << f.exp_bits) - 1;
  std::uint32_t e = (b >> f.mant_bits) & exp_all;
  std::uint32_t m = b & ((1u << f.mant_bits) - 1);
  if (f.all_ones_exp_is_special && e == exp_all) {
    if (f.encodes_infinity && m == 0) return {ValueClass::Inf, neg, 0, 0};
    return {ValueClass::NaN, false, 0, 0};
  }
  // Denormals are zero: a zero exponent field decodes as signed zero.
  if (e == 0) return {ValueClass::Zero, neg, 0, 0};
  return {ValueClass::Normal, neg, static_cast<int>(e) - f.bias(),
          m | (1u << f.mant_bits)};
}

DecodedValue decode(std::uint64_t bits, const IntFormat& f) {
  check_pattern_width(bits, f.bits, f.name);
  std::uint64_t raw = bits & low_mask64(f.bits);
  std::int64_t v = static_cast<std::int64_t>(raw);
  if (raw >> (f.bits - 1)) v -= std::int64_t{1} << f.bits;  // sign extend
  if (v == 0) return {ValueClass::Zero, false, 0, 0};
  bool neg = v < 0;
  std::uint64_t mag = neg ? static_cast<std::uint64_t>(-v) : static_cast<std::uint64_t>(v);
  return {ValueClass::Normal, neg, 0, static_cast<std::uint32_t>(mag)};
}

DecodedValue decode(std::uint64_t bits, const Format& f) {
  return is_int(f) ? decode(bits, std::get<IntFormat>(f))
                   : decode(bits, std::get<FloatFormat>(f));
}

namespace {

std::uint32_t saturate_overflow(bool negative, const FloatFormat& f) {
  if (f.encodes_infinity) return f.inf_bits(negative);
  if (f.all_ones_exp_is_special) return f.quiet_nan_bits();
  return f.max_finite_bits(negative);
}

}  // namespace

std::uint32_t encode(const ExactValue& v, const FloatFormat& f) {
  switch (v.cls) {
    case ValueClass::NaN:
      // Formats with no special encodings at all saturate NaN to max finite.
      if (!f.all_ones_exp_is_special) return f.max_finite_bits(false);
      return f.quiet_nan_bits();
    case ValueClass::Inf:
      return saturate_overflow(v.negative, f);
    case ValueClass::Zero:
      return f.zero_bits(v.negative);
    case ValueClass::Subnormal:
      throw ContractViolation("encode: subnormal class is not a value");
    case ValueClass::Normal:
      break;
  }
  if (v.mag == 0) return f.zero_bits(v.negative);

  int prec = f.mant_bits + 1;
  int len = bit_width_u128(v.mag);
  int exp = v.exp2 + len - 1;  // unbiased exponent of the leading bit
  std::uint64_t kept;
  if (len > prec) {
    int shift = len - prec;
    kept = static_cast<std::uint64_t>(v.mag >> shift);
    unsigned __int128 rem = v.mag & ((static_cast<unsigned __int128>(1) << shift) - 1);
    unsigned __int128 half = static_cast<unsigned __int128>(1) << (shift - 1);
    if (rem > half || (rem == half && (kept & 1)))
      if (++kept == (std::uint64_t{1} << prec)) {
        kept >>= 1;
        ++exp;
      }
  } else {
    kept = static_cast<std::uint64_t>(v.mag) << (prec - len);
  }

  if (exp > f.max_exp()) return saturate_overflow(v.negative, f);
  if (exp < f.min_exp()) return f.zero_bits(v.negative);  // flush to zero

  std::uint32_t e_field = static_cast<std::uint32_t>(exp + f.bias());
  std::uint32_t m_field = static_cast<std::uint32_t>(kept) & ((1u << f.mant_bits) - 1);
  return f.zero_bits(v.negative) | (e_field << f.mant_bits) | m_field;
}

void MacDatatype::validate() const {
  if (id.empty()) throw ConfigError("datatype needs an id");
  if (format_name(type_c) != format_name(type_p))
    throw ConfigError("datatype " + id + ": accumulator and product formats must match");
  if (int_accumulate()) {
    if (!is_int(type_a) || !is_int(type_b))
      throw ConfigError("datatype " + id + ": integer accumulation needs integer operands");
    if (std::get<IntFormat>(type_p).bits != 32)
      throw ConfigError("datatype " + id + ": integer accumulators are 32-bit");
  } else {
    if (std::get<FloatFormat>(type_p).width() < 16)
      throw ConfigError("datatype " + id + ": accumulator narrower than 16 bits");
  }
}

void Registry::add(FloatFormat f) {
  f.validate();
  if (has_format(f.name)) throw ConfigError("duplicate format " + f.name);
  formats_.push_back(std::move(f));
}

void Registry::add(IntFormat f) {
  f.validate();
  if (has_format(f.name)) throw ConfigError("duplicate format " + f.name);
  formats_.push_back(std::move(f));
}

bool Registry::has_format(const std::string& name) const {
  for (const auto& f : formats_)
    if (format_name(f) == name) return true;
  return false;
}

bool Registry::has_datatype(const std::string& id) const {
  for (const auto& d : datatypes_)
    if (d.id == id) return true;
  return false;
}

const Format& Registry::format(const std::string& name) const {
  for (const auto& f : formats_)
    if (format_name(f) == name) return f;
  throw ConfigError("unknown format: " + name);
}

const MacDatatype& Registry::datatype(const std::string& id) const {
  for (const auto& d : datatypes_)
    if (d.id == id) return d;
  throw ConfigError("unknown datatype: " + id);
}

void Registry::add_datatype(const std::string& id, const std::string& a,
                            const std::string& b, const std::string& c,
                            const std::string& p) {
  if (has_datatype(id)) throw ConfigError("duplicate datatype " + id);
  MacDatatype d{id, format(a), format(b), format(c), format(p)};
  d.validate();
  datatypes_.push_back(std::move(d));
}

Registry Registry::standard() {
  Registry r;
  r.add(FloatFormat{"fp4", 2, 1, false, true});
  r.add(FloatFormat{"fp8", 4, 3, false, true});
  r.add(FloatFormat{"fp8alt", 5, 2, true, true});
  r.add(FloatFormat{"fp16", 5, 10, true, true});
  r.add(FloatFormat{"bf16", 8, 7, true, true});
  r.add(FloatFormat{"fp32", 8, 23, true, true});  // reference use only
  for (int b = 2; b <= 8; ++b) r.add(IntFormat{"int" + std::to_string(b), b});
  r.add(IntFormat{"int32", 32});

  for (int b = 2; b <= 8; ++b) {
    std::string i = "int" + std::to_string(b);
    r.add_datatype(i + "xbf16", i, "bf16", "bf16", "bf16");
    r.add_datatype(i + "xfp16", i, "fp16", "fp16", "fp16");
  }
  r.add_datatype("int8xint8", "int8", "int8", "int32", "int32");
  r.add_datatype("fp4xfp4", "fp4", "fp4", "bf16", "bf16");
  r.add_datatype("fp4xbf16", "fp4", "bf16", "bf16", "bf16");
  r.add_datatype("fp4xfp16", "fp4", "fp16", "fp16", "fp16");
  r.add_datatype("fp8xfp8", "fp8", "fp8", "bf16", "bf16");
  r.add_datatype("fp8xbf16", "fp8", "bf16", "bf16", "bf16");
  r.add_datatype("fp8xfp16", "fp8", "fp16", "fp16", "fp16");
  r.add_datatype("fp8altxfp8alt", "fp8alt", "fp8alt", "bf16", "bf16");
  r.add_datatype("bf16xbf16", "bf16", "bf16", "bf16", "bf16");
  r.add_datatype("fp16xfp16", "fp16", "fp16", "fp16", "fp16");
  return r;
}

std::string Registry::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["floats"] = nlohmann::json::array();
  j["ints"] = nlohmann::json::array();
  j["datatypes"] = nlohmann::json::array();
  for (const auto& f : formats_) {
    if (is_int(f)) {
      const auto& i = std::get<IntFormat>(f);
      j["ints"].push_back({{"name", i.name}, {"bits", i.bits}});
    } else {
      const auto& ff = std::get<FloatFormat>(f);
      j["floats"].push_back({{"name", ff.name},
                             {"exp_bits", ff.exp_bits},
                             {"mant_bits", ff.mant_bits},
                             {"encodes_infinity", ff.encodes_infinity},
                             {"all_ones_exp_is_special", ff.all_ones_exp_is_special}});
    }
  }
  for (const auto& d : datatypes_) {
    j["datatypes"].push_back({{"id", d.id},
                              {"a", format_name(d.type_a)},
                              {"b", format_name(d.type_b)},
                              {"c", format_name(d.type_c)},
                              {"p", format_name(d.type_p)}});
  }
  return j.dump(2);
}

Registry Registry::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("format registry: ") + e.what());
  }
  if (!j.is_object())
    throw ConfigError("format registry: expected a JSON object");
  if (j.value("schema_version", 0) != 1)
    throw ConfigError("format registry: unsupported schema_version");
  Registry r;
  try {
    for (const auto& f : j.value("floats", nlohmann::json::array())) {
      r.add(FloatFormat{f.at("name").get<std::string>(),
                        f.at("exp_bits").get<int>(), f.at("mant_bits").get<int>(),
                        f.value("encodes_infinity", true),
                        f.value("all_ones_exp_is_special", true)});
    }
    for (const auto& f : j.value("ints", nlohmann::json::array()))
      r.add(IntFormat{f.at("name").get<std::string>(), f.at("bits").get<int>()});
    for (const auto& d : j.value("datatypes", nlohmann::json::array()))
      r.add_datatype(d.at("id").get<std::string>(), d.at("a").get<std::string>(),
                     d.at("b").get<std::string>(), d.at("c").get<std::string>(),
                     d.at("p").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("format registry: ") + e.what());
  }
  return r;
}

}  // namespace xtramac
