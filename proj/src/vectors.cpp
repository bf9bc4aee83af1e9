#include "xtramac/vectors.hpp"

#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "xtramac/errors.hpp"

namespace xtramac {

namespace {

std::string hex_field(std::uint64_t value, int digits) {
  std::string s(static_cast<std::size_t>(digits), '0');
  for (int i = digits - 1; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = "0123456789abcdef"[value & 0xF];
    value >>= 4;
  }
  return s;
}

std::uint64_t parse_hex(const std::string& field, int max_bits, int line,
                        const char* what) {
  if (field.empty() || field.size() > 16)
    throw ConfigError("vectors line " + std::to_string(line) + ": bad " +
                      what + " field");
  std::uint64_t v = 0;
  for (char ch : field) {
    int digit;
    if (ch >= '0' && ch <= '9') digit = ch - '0';
    else if (ch >= 'a' && ch <= 'f') digit = ch - 'a' + 10;
    else if (ch >= 'A' && ch <= 'F') digit = ch - 'A' + 10;
    else
      throw ConfigError("vectors line " + std::to_string(line) + ": bad " +
                        what + " field");
    v = (v << 4) | static_cast<std::uint64_t>(digit);
  }
  if (max_bits < 64 && (v >> max_bits) != 0)
    throw ConfigError("vectors line " + std::to_string(line) + ": " + what +
                      " exceeds its encoding width");
  return v;
}

}  // namespace

std::string format_record(const Registry& reg, const VectorRecord& r) {
  const MacDatatype& dt = reg.datatype(r.datatype);
  std::string s = r.datatype;
  s += ' ';
  s += hex_field(r.a, hex_digits(dt.type_a));
  s += ' ';
  s += hex_field(r.b, hex_digits(dt.type_b));
  s += ' ';
  s += hex_field(r.c, hex_digits(dt.type_c));
  s += ' ';
  s += hex_field(r.p, hex_digits(dt.type_p));
  return s;
}

void write_vectors(std::ostream& os, const Registry& reg,
                   const std::vector<VectorRecord>& records) {
  os << kVectorHeader << '\n';
  for (const auto& r : records) os << format_record(reg, r) << '\n';
}

std::vector<VectorRecord> read_vectors(std::istream& is, const Registry& reg) {
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  std::vector<VectorRecord> out;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kVectorHeader)
        throw ConfigError("vectors: missing '" + std::string(kVectorHeader) +
                          "' header");
      header_seen = true;
      continue;
    }
    if (line[0] == '#') continue;

    std::istringstream ss(line);
    std::string id, fa, fb, fc, fp, extra;
    if (!(ss >> id >> fa >> fb >> fc >> fp) || (ss >> extra))
      throw ConfigError("vectors line " + std::to_string(lineno) +
                        ": expected 5 fields");
    if (!reg.has_datatype(id))
      throw ConfigError("vectors line " + std::to_string(lineno) +
                        ": unknown datatype '" + id + "'");
    const MacDatatype& dt = reg.datatype(id);
    VectorRecord r;
    r.datatype = id;
    r.a = parse_hex(fa, encoding_width(dt.type_a), lineno, "A");
    r.b = parse_hex(fb, encoding_width(dt.type_b), lineno, "B");
    r.c = parse_hex(fc, encoding_width(dt.type_c), lineno, "C");
    r.p = static_cast<std::uint32_t>(
        parse_hex(fp, encoding_width(dt.type_p), lineno, "P"));
    out.push_back(std::move(r));
  }
  if (!header_seen) throw ConfigError("vectors: empty input");
  return out;
}

std::vector<VectorRecord> generate_vectors(const Registry& reg,
                                           const std::string& datatype,
                                           int count, std::uint64_t seed,
                                           RoundingMode mode) {
  if (count < 1) throw ConfigError("generate: count must be positive");
  const MacDatatype& dt = reg.datatype(datatype);
  std::mt19937_64 rng(seed);
  auto draw = [&rng](int bits) {
    return rng() & ((bits >= 64) ? ~std::uint64_t{0}
                                 : ((std::uint64_t{1} << bits) - 1));
  };
  std::vector<VectorRecord> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    VectorRecord r;
    r.datatype = datatype;
    r.a = draw(encoding_width(dt.type_a));
    r.b = draw(encoding_width(dt.type_b));
    r.c = draw(encoding_width(dt.type_c));
    r.p = oracle_mac(r.a, r.b, r.c, dt, mode);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace xtramac
