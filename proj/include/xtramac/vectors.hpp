#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "xtramac/formats.hpp"
#include "xtramac/oracle.hpp"

namespace xtramac {

inline constexpr const char* kVectorHeader = "#xtramac-vectors v1";

/// One golden multiply-accumulate case: raw operand patterns and the
/// expected accumulator pattern.
struct VectorRecord {
  std::string datatype;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t c = 0;
  std::uint32_t p = 0;
};

/// Text form: header line, then one record per line as
/// `<datatype> <a> <b> <c> <p>` with lowercase hex fields zero-padded to
/// their format's width. '#' lines and blank lines are ignored on read.
void write_vectors(std::ostream& os, const Registry& reg,
                   const std::vector<VectorRecord>& records);
std::vector<VectorRecord> read_vectors(std::istream& is, const Registry& reg);

/// Uniform random operand patterns with oracle-computed results.
std::vector<VectorRecord> generate_vectors(const Registry& reg,
                                           const std::string& datatype,
                                           int count, std::uint64_t seed,
                                           RoundingMode mode = RoundingMode::Unfused);

std::string format_record(const Registry& reg, const VectorRecord& r);

}  // namespace xtramac
