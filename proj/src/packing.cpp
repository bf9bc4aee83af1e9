#include "xtramac/packing.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include <json.hpp>

namespace xtramac {

const char* to_string(PackPattern p) {
  return p == PackPattern::Broadcast ? "broadcast" : "cross_product";
}

int parallelism_bound(int stride) {
  if (stride <= 0) throw ContractViolation("parallelism_bound: stride must be positive");
  return std::min(kPortABits / stride, kPortBBits / stride);
}

namespace {

struct Candidate {
  PackPattern pattern;
  std::vector<int> a_offsets;
  std::vector<int> b_offsets;
  int lanes = 0;
  int offset_sum = 0;
};

// A candidate is certified when operand fields fit and stay disjoint on each
// port and every lane's product field is disjoint from all others within the
// 45-bit result. Each field holds exactly one product below 2^lane_width, so
// disjoint fields guarantee carry-free recovery.
bool certify(const std::vector<int>& a_off, const std::vector<int>& b_off,
             int a_width, int b_width, int stride) {
  auto ports_ok = [](const std::vector<int>& off, int width, int port_bits) {
    for (size_t i = 0; i < off.size(); ++i) {
      if (off[i] < 0 || off[i] + width > port_bits) return false;
      for (size_t j = i + 1; j < off.size(); ++j)
        if (std::abs(off[i] - off[j]) < width) return false;
    }
    return true;
  };
  if (!ports_ok(a_off, a_width, kPortABits)) return false;
  if (!ports_ok(b_off, b_width, kPortBBits)) return false;

  std::vector<int> fields;
  for (int s : a_off)
    for (int t : b_off) fields.push_back(s + t);
  for (size_t i = 0; i < fields.size(); ++i) {
    if (fields[i] + stride > kProductBits) return false;
    for (size_t j = i + 1; j < fields.size(); ++j)
      if (std::abs(fields[i] - fields[j]) < stride) return false;
  }
  return true;
}

std::vector<int> grid(int count, int step) {
  std::vector<int> v(count);
  for (int i = 0; i < count; ++i) v[i] = i * step;
  return v;
}

bool better(const Candidate& x, const Candidate& y) {
  if (x.lanes != y.lanes) return x.lanes > y.lanes;
  if (x.offset_sum != y.offset_sum) return x.offset_sum < y.offset_sum;
  if (x.pattern != y.pattern) return x.pattern == PackPattern::Broadcast;
  if (x.a_offsets != y.a_offsets) return x.a_offsets < y.a_offsets;
  return x.b_offsets < y.b_offsets;
}

}  // namespace

PackingPlan plan(const MacDatatype& dt, int guard) {
  if (guard < 1) throw ConfigError("plan: guard must be at least 1 bit");
  int a_width = packed_width(dt.type_a);
  int b_width = packed_width(dt.type_b);
  std::uint64_t max_prod = std::uint64_t{max_packed_magnitude(dt.type_a)} *
                           max_packed_magnitude(dt.type_b);
  int lane_width = std::bit_width(max_prod);
  int stride = lane_width + guard;
  int lane_cap = std::min<int>(kMaxLanes, 64 / encoding_width(dt.type_p));

  Candidate best;
  auto consider = [&](PackPattern pat, std::vector<int> a_off, std::vector<int> b_off) {
    if (static_cast<int>(a_off.size() * b_off.size()) > lane_cap) return;
    if (!certify(a_off, b_off, a_width, b_width, stride)) return;
    Candidate c{pat, std::move(a_off), std::move(b_off), 0, 0};
    c.lanes = static_cast<int>(c.a_offsets.size() * c.b_offsets.size());
    c.offset_sum = std::accumulate(c.a_offsets.begin(), c.a_offsets.end(), 0) +
                   std::accumulate(c.b_offsets.begin(), c.b_offsets.end(), 0);
    if (best.lanes == 0 || better(c, best)) best = std::move(c);
  };

  for (int step = 1; step <= kPortABits; ++step)
    for (int count = 1; count <= lane_cap; ++count)
      consider(PackPattern::Broadcast, grid(count, step), {0});
  for (int step_a = 1; step_a <= kPortABits; ++step_a)
    for (int step_b = 1; step_b <= kPortBBits; ++step_b)
      for (int na = 1; na <= lane_cap; ++na)
        for (int nb = 2; na * nb <= lane_cap; ++nb)
          consider(PackPattern::CrossProduct, grid(na, step_a), grid(nb, step_b));

  if (best.lanes == 0)
    throw ConfigError("plan: no feasible layout for datatype " + dt.id +
                      " with guard " + std::to_string(guard));

  PackingPlan p;
  p.datatype = dt.id;
  p.pattern = best.pattern;
  p.a_offsets = best.a_offsets;
  p.b_offsets = best.b_offsets;
  p.a_width = a_width;
  p.b_width = b_width;
  p.lane_width = lane_width;
  p.guard = guard;
  p.stride = stride;
  p.lanes = best.lanes;
  p.port_bound = parallelism_bound(stride);
  for (size_t j = 0; j < p.b_offsets.size(); ++j)
    for (size_t i = 0; i < p.a_offsets.size(); ++i)
      p.lane_map.push_back({static_cast<int>(i), static_cast<int>(j),
                            p.a_offsets[i] + p.b_offsets[j]});
  return p;
}

DspPorts pack(const PackingPlan& p, const std::uint32_t* a_mags, int a_count,
              const std::uint32_t* b_mags, int b_count) {
  if (a_count != static_cast<int>(p.a_offsets.size()) ||
      b_count != static_cast<int>(p.b_offsets.size()))
    throw ContractViolation("pack: operand count does not match plan");
  DspPorts ports;
  for (int i = 0; i < a_count; ++i) {
    if (a_mags[i] >> p.a_width)
      throw ContractViolation("pack: a magnitude exceeds field width");
    ports.a |= a_mags[i] << p.a_offsets[i];
  }
  for (int j = 0; j < b_count; ++j) {
    if (b_mags[j] >> p.b_width)
      throw ContractViolation("pack: b magnitude exceeds field width");
    ports.b |= b_mags[j] << p.b_offsets[j];
  }
  return ports;
}

DspPorts pack(const PackingPlan& p, const std::vector<std::uint32_t>& a_mags,
              const std::vector<std::uint32_t>& b_mags) {
  return pack(p, a_mags.data(), static_cast<int>(a_mags.size()), b_mags.data(),
              static_cast<int>(b_mags.size()));
}

void extract_into(const PackingPlan& p, std::uint64_t product,
                  std::array<std::uint32_t, kMaxLanes>& out) {
  std::uint64_t mask = (std::uint64_t{1} << p.stride) - 1;
  for (int k = 0; k < p.lanes; ++k)
    out[k] = static_cast<std::uint32_t>((product >> p.lane_map[k].offset) & mask);
}

std::vector<std::uint32_t> extract(const PackingPlan& p, std::uint64_t product) {
  std::array<std::uint32_t, kMaxLanes> tmp{};
  extract_into(p, product, tmp);
  return std::vector<std::uint32_t>(tmp.begin(), tmp.begin() + p.lanes);
}

std::string PackingPlan::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["datatype"] = datatype;
  j["pattern"] = xtramac::to_string(pattern);
  j["lanes"] = lanes;
  j["lane_width"] = lane_width;
  j["guard"] = guard;
  j["stride"] = stride;
  j["a_width"] = a_width;
  j["b_width"] = b_width;
  j["a_offsets"] = a_offsets;
  j["b_offsets"] = b_offsets;
  j["port_bound"] = port_bound;
  j["lane_map"] = nlohmann::json::array();
  for (const auto& lf : lane_map)
    j["lane_map"].push_back(
        {{"a", lf.a_index}, {"b", lf.b_index}, {"offset", lf.offset}});
  return j.dump(2);
}

namespace {

std::string field_row(const char* label, int bits, const std::vector<int>& offsets,
                      int width) {
  std::string row(bits, '.');
  for (size_t i = 0; i < offsets.size(); ++i)
    for (int b = 0; b < width; ++b)
      row[bits - 1 - (offsets[i] + b)] = static_cast<char>('0' + i % 10);
  return std::string(label) + row;
}

}  // namespace

std::string PackingPlan::layout_diagram() const {
  std::string out;
  out += field_row("A[27] ", kPortABits, a_offsets, a_width) + "\n";
  out += field_row("B[18] ", kPortBBits, b_offsets, b_width) + "\n";
  std::string prod(kProductBits, '.');
  for (size_t k = 0; k < lane_map.size(); ++k)
    for (int b = 0; b < stride; ++b)
      prod[kProductBits - 1 - (lane_map[k].offset + b)] =
          b >= lane_width ? 'g' : static_cast<char>('0' + k % 10);
  out += "P[45] " + prod + "\n";
  return out;
}

}  // namespace xtramac
