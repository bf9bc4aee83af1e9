#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "xtramac/dsp48.hpp"
#include "xtramac/formats.hpp"

namespace xtramac {

// The output stage assembles at most a 64-bit word, so no plan carries more
// than four 16-bit (or two 32-bit) results per multiplier.
inline constexpr int kMaxLanes = 4;

enum class PackPattern {
  Broadcast,     // k operands on the A port against one shared B operand
  CrossProduct,  // i x j operands; every pairwise product is a lane
};

const char* to_string(PackPattern p);

struct LaneField {
  int a_index = 0;
  int b_index = 0;
  int offset = 0;  // bit position of the lane's product field
};

/// Certified packed-multiplier layout for one datatype. Lane k multiplies
/// a-operand `lane_map[k].a_index` by b-operand `lane_map[k].b_index`; the
/// product occupies `stride` bits starting at `lane_map[k].offset`, of which
/// the top `guard` bits stay zero to isolate neighbouring lanes.
struct PackingPlan {
  std::string datatype;
  PackPattern pattern = PackPattern::Broadcast;
  std::vector<int> a_offsets;
  std::vector<int> b_offsets;
  int a_width = 0;     // packed magnitude bits per a-operand
  int b_width = 0;
  int lane_width = 0;  // bits of the widest per-lane product
  int guard = 1;
  int stride = 0;      // lane_width + guard
  int lanes = 0;
  int port_bound = 0;  // symmetric per-port bound min(27/stride, 18/stride)
  std::vector<LaneField> lane_map;

  std::string to_json() const;
  std::string layout_diagram() const;
};

/// Symmetric packing bound: how many stride-wide fields fit on both ports.
/// Asymmetric certified plans may legitimately exceed it.
int parallelism_bound(int stride);

/// Deterministic search over Broadcast and CrossProduct offset grids,
/// maximizing lane count (ties: smaller offset sum, then Broadcast, then
/// lexicographically smallest offsets). Throws ConfigError when no layout
/// fits the ports, e.g. under an oversized guard.
PackingPlan plan(const MacDatatype& dt, int guard = 1);

/// OR the shifted operand magnitudes into the two ports. Magnitudes must fit
/// their field widths; counts must match the plan.
DspPorts pack(const PackingPlan& p, const std::uint32_t* a_mags, int a_count,
              const std::uint32_t* b_mags, int b_count);
DspPorts pack(const PackingPlan& p, const std::vector<std::uint32_t>& a_mags,
              const std::vector<std::uint32_t>& b_mags);

/// Recover per-lane products from the wide multiply result.
void extract_into(const PackingPlan& p, std::uint64_t product,
                  std::array<std::uint32_t, kMaxLanes>& out);
std::vector<std::uint32_t> extract(const PackingPlan& p, std::uint64_t product);

}  // namespace xtramac
