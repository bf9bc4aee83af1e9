#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xtramac/formats.hpp"

namespace xtramac {

// ---------- bit-exact tiled GEMV simulation ----------

/// A run of consecutive columns sharing one MAC datatype. Tiles switch the
/// operand formats at column granularity; every tile must certify the same
/// lane count and use the same accumulator format.
struct GemvTile {
  std::string datatype;
  int columns = 0;
};

struct GemvProblem {
  int rows = 0;
  int cols = 0;
  std::vector<GemvTile> tiles;             // column coverage, in order
  std::vector<std::uint64_t> weights;      // row-major A-operand patterns
  std::vector<std::uint64_t> activations;  // per-column B-operand patterns
  std::vector<std::uint64_t> init;         // per-row initial accumulators
                                           // (empty selects +0)
};

struct GemvResult {
  std::vector<std::uint32_t> outputs;  // per-row accumulator patterns
  std::uint64_t cycles = 0;            // columns + unit latency, no stalls
  int lane_parallelism = 0;            // rows per instance
  int row_groups = 0;
};

/// Stream the columns through cascaded multiply-accumulate instances: each
/// instance carries `lane_parallelism` adjacent rows against the shared
/// activation (a broadcast layout), folding left in column order. Datatype
/// switches between tiles cost no cycles. CrossProduct-only datatypes are
/// rejected: a weight/activation stream has no second activation operand.
GemvResult simulate_gemv(const Registry& reg, const GemvProblem& prob,
                         int guard = 1);

// ---------- streaming-engine shape and roofline ----------

/// Channel-fed GEMV engine description: each memory channel supplies one
/// cascaded chain of MAC instances every cycle.
struct GemvEngine {
  std::string name;
  std::string datatype;
  int channels = 32;
  int active_channels = 30;  // channels left after activation/write-back
  int channel_bits = 512;
  double frequency_hz = 3.0e8;
  double bandwidth_bytes = 4.6e11;
  double bandwidth_efficiency = 0.74;

  static GemvEngine from_json(const std::string& text);
  std::string to_json() const;
};

/// MAC instances one channel keeps busy: channel bits over
/// (weight encoding bits x lanes per instance).
int macs_per_channel(const Registry& reg, const GemvEngine& e);
/// Instance budget with every channel streaming weights.
int max_instances(const Registry& reg, const GemvEngine& e);
/// Instances fed by the active channels.
int deployed_instances(const Registry& reg, const GemvEngine& e);

struct RooflineEstimate {
  double seconds = 0;
  double stream_seconds = 0;
  double compute_seconds = 0;
  bool bandwidth_bound = false;
  double macs = 0;
  double weight_bytes = 0;
};

/// First-order time for a rows x cols GEMV: the larger of weight streaming
/// at effective bandwidth and MAC issue over the deployed instances.
RooflineEstimate roofline_gemv(const Registry& reg, const GemvEngine& e,
                               int rows, int cols);

// ---------- platform-level decode model ----------

struct UnitProfile {
  double luts = 0;
  double ffs = 0;
  double dsps = 0;
};

/// Accelerator-card resource pools plus the per-lane footprints of the two
/// MAC implementations being compared.
struct Platform {
  std::string name;
  double luts = 0;
  double ffs = 0;
  double dsps = 0;
  double frequency_hz = 0;
  double bandwidth_bytes = 0;
  double bandwidth_efficiency = 1.0;
  UnitProfile packed_unit;
  UnitProfile upcast_unit;

  static Platform from_json(const std::string& text);
  std::string to_json() const;

  /// Lanes that fit the pools with this per-lane footprint (floored min
  /// over LUT, FF and DSP budgets).
  double lanes(const UnitProfile& u) const;
  /// MACs per second: lanes x frequency.
  double mac_rate(const UnitProfile& u) const;
};

struct MoeSpec {
  int experts = 0;
  int active_experts = 0;
  int intermediate = 0;  // per-expert FFN width
};

/// Decoder-only transformer checkpoint shape with its deployment datatypes.
/// Dense checkpoints quantize every projection with `projection_datatype`;
/// for MoE checkpoints that datatype covers the experts while the attention
/// projections stay in `attention_datatype`.
struct LlmModel {
  std::string name;
  int layers = 0;
  int hidden = 0;
  int intermediate = 0;  // dense FFN width (ignored when moe is set)
  int heads = 0;
  int kv_heads = 0;
  int head_dim = 0;
  int vocab = 0;
  std::optional<MoeSpec> moe;
  std::string projection_datatype;
  std::string attention_datatype;
  std::string lm_head_datatype;
  int kv_bytes_per_element = 2;

  static LlmModel from_json(const std::string& text);
  std::string to_json() const;
};

struct DecodePhase {
  double seconds = 0;
  double stream_seconds = 0;
  double compute_seconds = 0;
  bool compute_bound = false;
};

/// One decode step: per-layer weight-path and attention-path phases (each
/// the max of its streaming and compute terms) plus the output projection.
struct DecodeLatency {
  double seconds = 0;
  DecodePhase projection;  // summed over layers
  DecodePhase attention;   // summed over layers
  DecodePhase lm_head;
};

DecodeLatency decode_latency(const Registry& reg, const LlmModel& m,
                             const Platform& p, const UnitProfile& unit,
                             int batch, int context);

/// Latency ratio upcast/packed for one decode step.
double decode_speedup(const Registry& reg, const LlmModel& m,
                      const Platform& p, int batch, int context);

}  // namespace xtramac
