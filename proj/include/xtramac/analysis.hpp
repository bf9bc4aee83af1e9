#pragma once

#include <string>
#include <utility>
#include <vector>

#include "xtramac/formats.hpp"

namespace xtramac {

// ---------- multiplier utilization accounting ----------

/// One member of an operating mode: a datatype occupying `dsp_count`
/// multipliers with `active_lanes` lanes doing useful work. -1 selects every
/// certified lane on every occupied multiplier; 0 models an idle member that
/// still burns its multipliers.
struct UtilizationEntry {
  std::string datatype;
  int dsp_count = 1;
  int active_lanes = -1;
};

struct UtilizationReport {
  int used_bits = 0;   // effective operand widths summed over active lanes
  int total_bits = 0;  // multiplier port budget over occupied multipliers
  double utilization = 0;
};

/// Effective multiplier utilization: (w_a + w_b) summed over active lanes,
/// divided by the 45-bit port budget of every occupied multiplier. Effective
/// widths count mantissa-plus-hidden bits for floats and the full
/// two's-complement width for integers.
UtilizationReport utilization(const Registry& reg,
                              const std::vector<UtilizationEntry>& entries,
                              int guard = 1);

/// Utilization of a single lane of `datatype` on one multiplier: what an
/// upcasting datapath achieves, since it computes one product per multiplier.
double single_lane_utilization(const Registry& reg,
                               const std::string& datatype);

/// A named steady state (which multipliers run what). A scenario averages
/// its modes, modelling a workload that alternates between datatypes.
struct ScenarioMode {
  std::string name;
  std::vector<UtilizationEntry> entries;
};

struct Scenario {
  std::string name;
  std::string description;
  std::vector<ScenarioMode> modes;
};

struct ScenarioReport {
  std::string name;
  std::string description;
  std::vector<std::pair<std::string, UtilizationReport>> modes;
  double average_utilization = 0;

  std::string to_json() const;
};

ScenarioReport evaluate_scenario(const Registry& reg, const Scenario& s,
                                 int guard = 1);

/// The architecture-study comparison set, alternating INT8 and BF16 work:
/// temporal sharing (a wide float op decomposed onto several multipliers),
/// spatial replication (one idle unit per inactive datatype), and the packed
/// unit (one multiplier, every lane active).
std::vector<Scenario> builtin_scenarios();

// ---------- adder cost model ----------

/// Relative area of a `width`-bit two's-complement adder: alpha * width.
double int_adder_cost(int width, double alpha = 1.0);

/// Relative area of a float adder of `width`-bit significands, dominated by
/// its alignment and normalization shift networks: beta * width * log2(width).
double fp_adder_cost(int width, double beta = 1.0);

// ---------- per-operation resource density ----------

struct ResourcesPerOp {
  double luts = 0;
  double ffs = 0;
  double dsps = 0;
};

/// Per-operation resource usage of the packed unit next to an upcasting
/// vendor datapath for one operand pairing (totals divided by lane count).
struct DensityRow {
  std::string label;     // operand pairing, e.g. "int2-8 x bf16"
  std::string datatype;  // representative registry id for the pairing
  ResourcesPerOp baseline;
  ResourcesPerOp packed_unit;

  ResourcesPerOp reduction_pct() const;  // 100 * (1 - packed/baseline)
  ResourcesPerOp density() const;        // baseline / packed, per resource
};

/// Measured per-operation comparison across the supported operand pairings.
std::vector<DensityRow> density_table();

struct DensitySummary {
  double lut_reduction_avg = 0;  // percent, averaged over rows
  double ff_reduction_avg = 0;
  double dsp_reduction_avg = 0;
  double min_density = 0;  // over all rows and resource types
  double max_density = 0;
};

DensitySummary summarize(const std::vector<DensityRow>& rows);

std::string to_json(const std::vector<DensityRow>& rows,
                    const DensitySummary& summary);

/// Per-operation footprints under runtime INT8/BF16 switching for the three
/// compared designs; the platform-level model uses these as unit profiles.
struct SwitchingProfile {
  std::string design;
  ResourcesPerOp per_bf16_op;
  ResourcesPerOp per_int8_op;
};

std::vector<SwitchingProfile> switching_profiles();

}  // namespace xtramac
