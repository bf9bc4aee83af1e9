#include "xtramac/gemv.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "xtramac/errors.hpp"
#include "xtramac/packing.hpp"
#include "xtramac/pipeline.hpp"

namespace xtramac {

namespace {

struct TileContext {
  const MacDatatype* dt = nullptr;
  PackingPlan plan;
  int columns = 0;
};

std::vector<TileContext> resolve_tiles(const Registry& reg,
                                       const GemvProblem& prob, int guard) {
  if (prob.tiles.empty()) throw ConfigError("gemv: no tiles");
  std::vector<TileContext> tiles;
  int covered = 0;
  for (const auto& t : prob.tiles) {
    if (t.columns <= 0) throw ConfigError("gemv: tile with no columns");
    TileContext tc;
    tc.dt = &reg.datatype(t.datatype);
    tc.plan = plan(*tc.dt, guard);
    tc.columns = t.columns;
    if (tc.plan.pattern != PackPattern::Broadcast)
      throw ConfigError(
          "gemv: datatype '" + t.datatype +
          "' certifies a cross-product layout; a weight/activation stream "
          "has no second activation operand");
    covered += t.columns;
    tiles.push_back(std::move(tc));
  }
  if (covered != prob.cols)
    throw ConfigError("gemv: tiles cover " + std::to_string(covered) +
                      " of " + std::to_string(prob.cols) + " columns");
  for (const auto& tc : tiles) {
    if (tc.plan.lanes != tiles.front().plan.lanes)
      throw ConfigError("gemv: tiles disagree on lane parallelism");
    if (format_name(tc.dt->type_p) != format_name(tiles.front().dt->type_p) ||
        format_name(tc.dt->type_c) != format_name(tiles.front().dt->type_c))
      throw ConfigError("gemv: tiles disagree on the accumulator format");
  }
  return tiles;
}

}  // namespace

GemvResult simulate_gemv(const Registry& reg, const GemvProblem& prob,
                         int guard) {
  if (prob.rows <= 0 || prob.cols <= 0)
    throw ConfigError("gemv: rows and cols must be positive");
  if (prob.weights.size() !=
      static_cast<std::size_t>(prob.rows) * static_cast<std::size_t>(prob.cols))
    throw ConfigError("gemv: weight count does not match rows x cols");
  if (prob.activations.size() != static_cast<std::size_t>(prob.cols))
    throw ConfigError("gemv: activation count does not match cols");
  if (!prob.init.empty() &&
      prob.init.size() != static_cast<std::size_t>(prob.rows))
    throw ConfigError("gemv: initial accumulator count does not match rows");

  const std::vector<TileContext> tiles = resolve_tiles(reg, prob, guard);
  const int lanes = tiles.front().plan.lanes;
  const int row_groups = (prob.rows + lanes - 1) / lanes;

  GemvResult res;
  res.lane_parallelism = lanes;
  res.row_groups = row_groups;
  res.outputs.resize(prob.rows);

  for (int g = 0; g < row_groups; ++g) {
    std::array<std::uint64_t, kMaxLanes> accs{};
    for (int k = 0; k < lanes; ++k) {
      const int row = g * lanes + k;
      if (row < prob.rows && !prob.init.empty()) accs[k] = prob.init[row];
    }

    int col = 0;
    for (const auto& tc : tiles) {
      const int enc_a = encoding_width(tc.dt->type_a);
      const int enc_b = encoding_width(tc.dt->type_b);
      const std::uint64_t a_mask = (std::uint64_t{1} << enc_a) - 1;
      for (int c = 0; c < tc.columns; ++c, ++col) {
        IssueSlot slot;
        slot.valid = true;
        for (int k = 0; k < lanes; ++k) {
          const int row = g * lanes + k;
          std::uint64_t w = 0;
          if (row < prob.rows) {
            w = prob.weights[static_cast<std::size_t>(row) * prob.cols + col];
            if (w & ~a_mask)
              throw ConfigError("gemv: weight exceeds its encoding width");
          }
          slot.a_word |= w << (k * enc_a);
          slot.c_lanes[k] = accs[k];
        }
        slot.b_word = prob.activations[col];
        if (enc_b < 64 && (slot.b_word >> enc_b) != 0)
          throw ConfigError("gemv: activation exceeds its encoding width");

        // Cascaded instances register once per hop, so the lane values are
        // the straight composition of the three computation stages.
        const Stage1Result s1 = stage1_map(slot, *tc.dt, tc.plan);
        const Stage2Result s2 = stage2_product(s1, *tc.dt, tc.plan);
        const Stage3Result s3 =
            stage3_accumulate(s2, s1, slot, *tc.dt, tc.plan);
        for (int k = 0; k < lanes; ++k) accs[k] = s3.lanes[k];
      }
    }

    for (int k = 0; k < lanes; ++k) {
      const int row = g * lanes + k;
      if (row < prob.rows)
        res.outputs[row] = static_cast<std::uint32_t>(accs[k]);
    }
  }

  // One column enters the chain per cycle; datatype switches ride along with
  // the operands and cost nothing.
  res.cycles = static_cast<std::uint64_t>(prob.cols) + MacConfig{}.latency();
  return res;
}

GemvEngine GemvEngine::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("gemv engine: ") + e.what());
  }
  if (!j.is_object())
    throw ConfigError("gemv engine: expected a JSON object");
  if (j.value("schema_version", 0) != 1)
    throw ConfigError("gemv engine: unsupported schema_version");
  GemvEngine e;
  try {
    e.name = j.at("name").get<std::string>();
    e.datatype = j.at("datatype").get<std::string>();
    e.channels = j.at("channels").get<int>();
    e.active_channels = j.at("active_channels").get<int>();
    e.channel_bits = j.at("channel_bits").get<int>();
    e.frequency_hz = j.at("frequency_hz").get<double>();
    e.bandwidth_bytes = j.at("bandwidth_bytes").get<double>();
    e.bandwidth_efficiency = j.at("bandwidth_efficiency").get<double>();
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("gemv engine: ") + ex.what());
  }
  if (e.channels < 1 || e.active_channels < 1 ||
      e.active_channels > e.channels || e.channel_bits < 8 ||
      e.frequency_hz <= 0 || e.bandwidth_bytes <= 0 ||
      e.bandwidth_efficiency <= 0 || e.bandwidth_efficiency > 1)
    throw ConfigError("gemv engine: implausible parameters");
  return e;
}

std::string GemvEngine::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["name"] = name;
  j["datatype"] = datatype;
  j["channels"] = channels;
  j["active_channels"] = active_channels;
  j["channel_bits"] = channel_bits;
  j["frequency_hz"] = frequency_hz;
  j["bandwidth_bytes"] = bandwidth_bytes;
  j["bandwidth_efficiency"] = bandwidth_efficiency;
  return j.dump(2);
}

int macs_per_channel(const Registry& reg, const GemvEngine& e) {
  const MacDatatype& dt = reg.datatype(e.datatype);
  const PackingPlan pl = plan(dt);
  const int weight_bits = encoding_width(dt.type_a);
  return e.channel_bits / (weight_bits * pl.lanes);
}

int max_instances(const Registry& reg, const GemvEngine& e) {
  return e.channels * macs_per_channel(reg, e);
}

int deployed_instances(const Registry& reg, const GemvEngine& e) {
  return e.active_channels * macs_per_channel(reg, e);
}

RooflineEstimate roofline_gemv(const Registry& reg, const GemvEngine& e,
                               int rows, int cols) {
  if (rows < 1 || cols < 1)
    throw ConfigError("roofline: rows and cols must be positive");
  const MacDatatype& dt = reg.datatype(e.datatype);
  const PackingPlan pl = plan(dt);
  const double weight_bits = encoding_width(dt.type_a);

  RooflineEstimate r;
  r.macs = static_cast<double>(rows) * cols;
  r.weight_bytes = r.macs * weight_bits / 8.0;
  r.stream_seconds =
      r.weight_bytes / (e.bandwidth_bytes * e.bandwidth_efficiency);
  const double rate = static_cast<double>(deployed_instances(reg, e)) *
                      pl.lanes * e.frequency_hz;
  r.compute_seconds = r.macs / rate;
  r.bandwidth_bound = r.stream_seconds >= r.compute_seconds;
  r.seconds = std::max(r.stream_seconds, r.compute_seconds);
  return r;
}

double Platform::lanes(const UnitProfile& u) const {
  if (u.luts <= 0 || u.ffs <= 0 || u.dsps <= 0)
    throw ConfigError("platform: unit profile must be positive");
  return std::floor(
      std::min({luts / u.luts, ffs / u.ffs, dsps / u.dsps}));
}

double Platform::mac_rate(const UnitProfile& u) const {
  const double n = lanes(u);
  if (n < 1) throw ConfigError("platform: unit does not fit the pools");
  return n * frequency_hz;
}

Platform Platform::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("platform: ") + e.what());
  }
  if (!j.is_object())
    throw ConfigError("platform: expected a JSON object");
  if (j.value("schema_version", 0) != 1)
    throw ConfigError("platform: unsupported schema_version");
  Platform p;
  try {
    p.name = j.at("name").get<std::string>();
    p.luts = j.at("luts").get<double>();
    p.ffs = j.at("ffs").get<double>();
    p.dsps = j.at("dsps").get<double>();
    p.frequency_hz = j.at("frequency_hz").get<double>();
    p.bandwidth_bytes = j.at("bandwidth_bytes").get<double>();
    p.bandwidth_efficiency = j.value("bandwidth_efficiency", 1.0);
    const auto& up = j.at("unit_profiles");
    auto load = [](const nlohmann::json& u) {
      return UnitProfile{u.at("luts").get<double>(),
                         u.at("ffs").get<double>(),
                         u.at("dsps").get<double>()};
    };
    p.packed_unit = load(up.at("packed"));
    p.upcast_unit = load(up.at("upcast"));
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("platform: ") + ex.what());
  }
  if (p.luts <= 0 || p.ffs <= 0 || p.dsps <= 0 || p.frequency_hz <= 0 ||
      p.bandwidth_bytes <= 0 || p.bandwidth_efficiency <= 0 ||
      p.bandwidth_efficiency > 1)
    throw ConfigError("platform: implausible parameters");
  return p;
}

std::string Platform::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["name"] = name;
  j["luts"] = luts;
  j["ffs"] = ffs;
  j["dsps"] = dsps;
  j["frequency_hz"] = frequency_hz;
  j["bandwidth_bytes"] = bandwidth_bytes;
  j["bandwidth_efficiency"] = bandwidth_efficiency;
  j["unit_profiles"] = {
      {"packed", {{"luts", packed_unit.luts},
                  {"ffs", packed_unit.ffs},
                  {"dsps", packed_unit.dsps}}},
      {"upcast", {{"luts", upcast_unit.luts},
                  {"ffs", upcast_unit.ffs},
                  {"dsps", upcast_unit.dsps}}}};
  return j.dump(2);
}

LlmModel LlmModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("llm model: ") + e.what());
  }
  if (!j.is_object())
    throw ConfigError("llm model: expected a JSON object");
  if (j.value("schema_version", 0) != 1)
    throw ConfigError("llm model: unsupported schema_version");
  LlmModel m;
  try {
    m.name = j.at("name").get<std::string>();
    m.layers = j.at("layers").get<int>();
    m.hidden = j.at("hidden").get<int>();
    m.intermediate = j.value("intermediate", 0);
    m.heads = j.at("heads").get<int>();
    m.kv_heads = j.at("kv_heads").get<int>();
    m.head_dim = j.at("head_dim").get<int>();
    m.vocab = j.at("vocab").get<int>();
    if (j.contains("moe") && !j["moe"].is_null()) {
      const auto& e = j["moe"];
      m.moe = MoeSpec{e.at("experts").get<int>(),
                      e.at("active_experts").get<int>(),
                      e.at("intermediate").get<int>()};
    }
    m.projection_datatype = j.at("projection_datatype").get<std::string>();
    m.attention_datatype = j.at("attention_datatype").get<std::string>();
    m.lm_head_datatype = j.at("lm_head_datatype").get<std::string>();
    m.kv_bytes_per_element = j.value("kv_bytes_per_element", 2);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("llm model: ") + ex.what());
  }
  if (m.layers < 1 || m.hidden < 1 || m.heads < 1 || m.kv_heads < 1 ||
      m.head_dim < 1 || m.vocab < 1 || m.kv_bytes_per_element < 1)
    throw ConfigError("llm model: implausible parameters");
  if (!m.moe && m.intermediate < 1)
    throw ConfigError("llm model: dense checkpoints need an FFN width");
  if (m.moe && (m.moe->experts < 1 || m.moe->active_experts < 1 ||
                m.moe->active_experts > m.moe->experts ||
                m.moe->intermediate < 1))
    throw ConfigError("llm model: implausible expert configuration");
  return m;
}

std::string LlmModel::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["name"] = name;
  j["layers"] = layers;
  j["hidden"] = hidden;
  j["intermediate"] = intermediate;
  j["heads"] = heads;
  j["kv_heads"] = kv_heads;
  j["head_dim"] = head_dim;
  j["vocab"] = vocab;
  if (moe)
    j["moe"] = {{"experts", moe->experts},
                {"active_experts", moe->active_experts},
                {"intermediate", moe->intermediate}};
  else
    j["moe"] = nullptr;
  j["projection_datatype"] = projection_datatype;
  j["attention_datatype"] = attention_datatype;
  j["lm_head_datatype"] = lm_head_datatype;
  j["kv_bytes_per_element"] = kv_bytes_per_element;
  return j.dump(2);
}

namespace {

double bytes_per_weight(const Registry& reg, const std::string& datatype) {
  const MacDatatype& dt = reg.datatype(datatype);
  return encoding_width(dt.type_a) / 8.0;
}

DecodePhase phase(double stream_seconds, double compute_seconds) {
  DecodePhase p;
  p.stream_seconds = stream_seconds;
  p.compute_seconds = compute_seconds;
  p.compute_bound = compute_seconds > stream_seconds;
  p.seconds = std::max(stream_seconds, compute_seconds);
  return p;
}

}  // namespace

DecodeLatency decode_latency(const Registry& reg, const LlmModel& m,
                             const Platform& p, const UnitProfile& unit,
                             int batch, int context) {
  if (batch < 1 || context < 1)
    throw ConfigError("decode: batch and context must be positive");
  const double bw = p.bandwidth_bytes * p.bandwidth_efficiency;
  const double rate = p.mac_rate(unit);
  const double b = batch;

  // Attention projections: Q and O carry heads x head_dim columns, K and V
  // carry kv_heads x head_dim. Dense FFNs use three hidden x intermediate
  // matrices; experts use the same shape at their own width.
  const double attn_params =
      2.0 * m.hidden * (static_cast<double>(m.heads) * m.head_dim) +
      2.0 * m.hidden * (static_cast<double>(m.kv_heads) * m.head_dim);
  const double proj_bpw = bytes_per_weight(reg, m.projection_datatype);
  const double attn_proj_bpw =
      m.moe ? bytes_per_weight(reg, m.attention_datatype) : proj_bpw;

  double ffn_params_streamed;  // per layer, per decode step
  double ffn_params_computed;  // per layer, per token
  if (m.moe) {
    const double expert_params =
        3.0 * m.hidden * static_cast<double>(m.moe->intermediate);
    const int streamed =
        std::min<std::int64_t>(m.moe->experts,
                               static_cast<std::int64_t>(m.moe->active_experts) *
                                   batch);
    ffn_params_streamed = streamed * expert_params;
    ffn_params_computed = m.moe->active_experts * expert_params;
  } else {
    const double dense = 3.0 * m.hidden * static_cast<double>(m.intermediate);
    ffn_params_streamed = dense;
    ffn_params_computed = dense;
  }

  const double proj_bytes_per_layer =
      attn_params * attn_proj_bpw + ffn_params_streamed * proj_bpw;
  const double proj_macs_per_token = attn_params + ffn_params_computed;

  DecodeLatency lat;
  lat.projection = phase(m.layers * proj_bytes_per_layer / bw,
                         m.layers * b * proj_macs_per_token / rate);

  // Attention math reads the K and V caches once per token and performs the
  // score and value products over the context.
  const double kv_bytes_per_layer = 2.0 * m.kv_heads * m.head_dim * context *
                                    m.kv_bytes_per_element;
  const double attn_macs_per_token =
      2.0 * m.heads * m.head_dim * static_cast<double>(context);
  lat.attention = phase(m.layers * b * kv_bytes_per_layer / bw,
                        m.layers * b * attn_macs_per_token / rate);

  const double lm_params = static_cast<double>(m.hidden) * m.vocab;
  lat.lm_head =
      phase(lm_params * bytes_per_weight(reg, m.lm_head_datatype) / bw,
            b * lm_params / rate);

  lat.seconds =
      lat.projection.seconds + lat.attention.seconds + lat.lm_head.seconds;
  return lat;
}

double decode_speedup(const Registry& reg, const LlmModel& m,
                      const Platform& p, int batch, int context) {
  const double packed =
      decode_latency(reg, m, p, p.packed_unit, batch, context).seconds;
  const double upcast =
      decode_latency(reg, m, p, p.upcast_unit, batch, context).seconds;
  return upcast / packed;
}

}  // namespace xtramac
