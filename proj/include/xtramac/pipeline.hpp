#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <vector>

#include "xtramac/formats.hpp"
#include "xtramac/packing.hpp"

namespace xtramac {

/// Operand classifications detected at input mapping time. They travel with
/// the in-flight operation so late stages can select special results without
/// re-inspecting operand bits.
struct SpecialFlags {
  bool a_nan = false, a_inf = false, a_zero = false, a_sign = false;
  bool b_nan = false, b_inf = false, b_zero = false, b_sign = false;
  bool c_nan = false, c_inf = false, c_zero = false, c_sign = false;
};

/// Per-lane metadata produced by input mapping. Exponents are rebased to the
/// output format's bias; an integer operand therefore carries exactly the
/// output bias (its logical unbiased exponent is zero).
struct LaneMeta {
  SpecialFlags flags;
  int a_exp_biased = 0;
  int b_exp_biased = 0;
};

struct MacConfig {
  std::vector<MacDatatype> datatypes;
  std::array<int, 4> stage_depths{1, 1, 1, 1};
  // Hardware-faithful mode evaluates every mapping submodule and both
  // accumulation paths each cycle; fast mode computes only the selected one.
  // Results are identical by construction.
  bool evaluate_all_paths = true;
  int guard = 1;

  int latency() const {
    return stage_depths[0] + stage_depths[1] + stage_depths[2] + stage_depths[3];
  }
};

struct IssueSlot {
  bool valid = false;
  int dtype_select = 0;
  std::uint64_t a_word = 0;  // operand encodings, lane 0 at the low bits
  std::uint64_t b_word = 0;
  std::array<std::uint64_t, kMaxLanes> c_lanes{};
};

struct MacOutput {
  bool valid = false;
  std::uint64_t serial = 0;
  int dtype_select = 0;
  int lanes = 0;
  std::array<std::uint32_t, kMaxLanes> lane_bits{};
  std::array<SpecialFlags, kMaxLanes> flags{};
  std::uint64_t word = 0;  // lanes concatenated, lane 0 at the low bits
};

struct Stage1Result {
  DspPorts ports;
  std::array<LaneMeta, kMaxLanes> lanes{};
};

struct Stage2Lane {
  std::uint32_t fp_bits = 0;   // product rounded into the output float format
  std::int64_t int_value = 0;  // signed raw product for integer accumulation
};

struct Stage2Result {
  std::array<Stage2Lane, kMaxLanes> lanes{};
};

struct Stage3Result {
  std::array<std::uint32_t, kMaxLanes> lanes{};
};

/// Stage 1: split the operand words, classify and flush operands, pack the
/// multiplier ports, and capture per-lane metadata.
Stage1Result stage1_map(const IssueSlot& slot, const MacDatatype& dt,
                        const PackingPlan& plan);

/// Stage 2: one wide multiply, then per lane: field extraction, sign and
/// exponent combination, leading-zero normalization, and rounding into the
/// accumulator format (or a signed integer product for integer datatypes).
Stage2Result stage2_product(const Stage1Result& s1, const MacDatatype& dt,
                            const PackingPlan& plan);

/// Stage 3: per-lane accumulation with the delayed C operands, through either
/// the float adder or the saturating integer adder. NaN dominance is selected
/// from the stage-1 flags rather than re-derived from bit patterns.
Stage3Result stage3_accumulate(const Stage2Result& s2, const Stage1Result& s1,
                               const IssueSlot& slot, const MacDatatype& dt,
                               const PackingPlan& plan);

/// Stage 4 assembly: concatenate lane results, lane 0 at the low bits.
std::uint64_t assemble_output(const Stage3Result& s3, const MacDatatype& dt,
                              int lanes);

/// Narrow float adder used by stage 3: guard/round/sticky alignment with a
/// bounded shift, round-to-nearest-even, flush-to-zero, saturation.
std::uint32_t fp_add_hw(std::uint32_t x_bits, std::uint32_t y_bits,
                        const FloatFormat& f);

/// Cycle-accurate model of the four-stage unit: initiation interval one,
/// fixed latency equal to the sum of the stage depths, no stall path.
class Pipeline {
 public:
  explicit Pipeline(MacConfig cfg);

  const MacConfig& config() const { return cfg_; }
  int latency() const { return cfg_.latency(); }
  int max_lanes() const { return max_lanes_; }
  std::uint64_t cycle() const { return cycle_; }
  const PackingPlan& plan_for(int dtype_select) const;

  /// Advance one cycle: accept `slot`, return the operation issued
  /// `latency()` cycles ago (invalid during fill and for bubbles).
  MacOutput step(const IssueSlot& slot);

  /// Emit one line per cycle: cycle number, per-stage occupancy (serial
  /// numbers or '-'), selected datatype and flag summary of the issue.
  void set_trace(std::ostream* os) { trace_ = os; }

 private:
  struct Txn {
    bool valid = false;
    std::uint64_t serial = 0;
    IssueSlot slot;
    Stage1Result s1;
    Stage2Result s2;
    Stage3Result s3;
    int age = 0;
  };

  void check_slot(const IssueSlot& slot) const;
  void trace_cycle() const;

  MacConfig cfg_;
  std::vector<PackingPlan> plans_;
  int max_lanes_ = 0;
  std::deque<Txn> inflight_;
  std::uint64_t cycle_ = 0;
  std::uint64_t next_serial_ = 1;
  std::ostream* trace_ = nullptr;
};

}  // namespace xtramac
