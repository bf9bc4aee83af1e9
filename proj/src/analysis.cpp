#include "xtramac/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "xtramac/dsp48.hpp"
#include "xtramac/errors.hpp"
#include "xtramac/packing.hpp"

namespace xtramac {

UtilizationReport utilization(const Registry& reg,
                              const std::vector<UtilizationEntry>& entries,
                              int guard) {
  UtilizationReport rep;
  for (const auto& e : entries) {
    const MacDatatype& dt = reg.datatype(e.datatype);
    const PackingPlan pl = plan(dt, guard);
    if (e.dsp_count < 1)
      throw ConfigError("utilization: dsp_count must be positive");
    const int all = pl.lanes * e.dsp_count;
    const int active = e.active_lanes < 0 ? all : e.active_lanes;
    if (active > all)
      throw ConfigError("utilization: more active lanes than certified (" +
                        e.datatype + ")");
    const int per_lane = packed_width(dt.type_a) + packed_width(dt.type_b);
    rep.used_bits += active * per_lane;
    rep.total_bits += kProductBits * e.dsp_count;
  }
  if (rep.total_bits > 0)
    rep.utilization = static_cast<double>(rep.used_bits) / rep.total_bits;
  return rep;
}

double single_lane_utilization(const Registry& reg,
                               const std::string& datatype) {
  const MacDatatype& dt = reg.datatype(datatype);
  const int per_lane = packed_width(dt.type_a) + packed_width(dt.type_b);
  return static_cast<double>(per_lane) / kProductBits;
}

ScenarioReport evaluate_scenario(const Registry& reg, const Scenario& s,
                                 int guard) {
  if (s.modes.empty())
    throw ConfigError("scenario '" + s.name + "' has no modes");
  ScenarioReport rep;
  rep.name = s.name;
  rep.description = s.description;
  double sum = 0;
  for (const auto& m : s.modes) {
    UtilizationReport u = utilization(reg, m.entries, guard);
    sum += u.utilization;
    rep.modes.emplace_back(m.name, u);
  }
  rep.average_utilization = sum / static_cast<double>(s.modes.size());
  return rep;
}

std::vector<Scenario> builtin_scenarios() {
  // All three alternate evenly between INT8 and BF16 phases.
  std::vector<Scenario> v;

  Scenario temporal;
  temporal.name = "temporal-sharing";
  temporal.description =
      "One unit serves both datatypes in time: INT8 packs the multiplier "
      "directly, BF16 is decomposed onto four multipliers as one operation.";
  temporal.modes = {
      {"int8", {{"int8xint8", 1, -1}}},
      {"bf16", {{"bf16xbf16", 4, 1}}},
  };
  v.push_back(std::move(temporal));

  Scenario spatial;
  spatial.name = "spatial-replication";
  spatial.description =
      "One single-lane unit per datatype; whichever datatype is not running "
      "leaves its multiplier idle.";
  spatial.modes = {
      {"int8", {{"int8xint8", 1, -1}, {"bf16xbf16", 1, 0}}},
      {"bf16", {{"int8xint8", 1, 0}, {"bf16xbf16", 1, 1}}},
  };
  v.push_back(std::move(spatial));

  Scenario packed;
  packed.name = "packed-unit";
  packed.description =
      "One datatype-switching unit; every certified lane of the selected "
      "datatype is active on the shared multiplier.";
  packed.modes = {
      {"int8", {{"int8xint8", 1, -1}}},
      {"bf16", {{"bf16xbf16", 1, -1}}},
  };
  v.push_back(std::move(packed));

  return v;
}

std::string ScenarioReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["name"] = name;
  j["description"] = description;
  j["modes"] = nlohmann::json::array();
  for (const auto& [mode, u] : modes) {
    j["modes"].push_back({{"name", mode},
                          {"used_bits", u.used_bits},
                          {"total_bits", u.total_bits},
                          {"utilization", u.utilization}});
  }
  j["average_utilization"] = average_utilization;
  return j.dump(2);
}

double int_adder_cost(int width, double alpha) {
  if (width < 1) throw ConfigError("int_adder_cost: width must be positive");
  return alpha * width;
}

double fp_adder_cost(int width, double beta) {
  if (width < 2) throw ConfigError("fp_adder_cost: width must be at least 2");
  return beta * width * std::log2(static_cast<double>(width));
}

ResourcesPerOp DensityRow::reduction_pct() const {
  auto pct = [](double base, double ours) {
    return 100.0 * (1.0 - ours / base);
  };
  return {pct(baseline.luts, packed_unit.luts),
          pct(baseline.ffs, packed_unit.ffs),
          pct(baseline.dsps, packed_unit.dsps)};
}

ResourcesPerOp DensityRow::density() const {
  return {baseline.luts / packed_unit.luts, baseline.ffs / packed_unit.ffs,
          baseline.dsps / packed_unit.dsps};
}

std::vector<DensityRow> density_table() {
  // Post-implementation usage divided by lane count; the upcasting baseline
  // always realizes one lane per multiplier, the packed unit two.
  return {
      {"int2-8 x bf16", "int4xbf16", {331, 222, 1}, {235, 124, 0.5}},
      {"int2-8 x fp16", "int4xfp16", {387, 262, 1}, {270, 137, 0.5}},
      {"fp4 x bf16", "fp4xbf16", {301, 226, 1}, {196, 115, 0.5}},
      {"fp4 x fp16", "fp4xfp16", {357, 266, 1}, {251, 131, 0.5}},
      {"fp8 x bf16", "fp8xbf16", {301, 226, 1}, {219, 123, 0.5}},
      {"fp8 x fp16", "fp8xfp16", {357, 266, 1}, {253, 133, 0.5}},
  };
}

DensitySummary summarize(const std::vector<DensityRow>& rows) {
  if (rows.empty()) throw ConfigError("summarize: empty density table");
  DensitySummary s;
  s.min_density = 1e300;
  s.max_density = 0;
  for (const auto& r : rows) {
    const ResourcesPerOp red = r.reduction_pct();
    s.lut_reduction_avg += red.luts;
    s.ff_reduction_avg += red.ffs;
    s.dsp_reduction_avg += red.dsps;
    const ResourcesPerOp d = r.density();
    for (double x : {d.luts, d.ffs, d.dsps}) {
      s.min_density = std::min(s.min_density, x);
      s.max_density = std::max(s.max_density, x);
    }
  }
  const auto n = static_cast<double>(rows.size());
  s.lut_reduction_avg /= n;
  s.ff_reduction_avg /= n;
  s.dsp_reduction_avg /= n;
  return s;
}

std::string to_json(const std::vector<DensityRow>& rows,
                    const DensitySummary& summary) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    const ResourcesPerOp red = r.reduction_pct();
    const ResourcesPerOp den = r.density();
    j["rows"].push_back(
        {{"label", r.label},
         {"datatype", r.datatype},
         {"baseline", {{"luts", r.baseline.luts},
                       {"ffs", r.baseline.ffs},
                       {"dsps", r.baseline.dsps}}},
         {"packed", {{"luts", r.packed_unit.luts},
                     {"ffs", r.packed_unit.ffs},
                     {"dsps", r.packed_unit.dsps}}},
         {"reduction_pct",
          {{"luts", red.luts}, {"ffs", red.ffs}, {"dsps", red.dsps}}},
         {"density",
          {{"luts", den.luts}, {"ffs", den.ffs}, {"dsps", den.dsps}}}});
  }
  j["summary"] = {{"lut_reduction_avg", summary.lut_reduction_avg},
                  {"ff_reduction_avg", summary.ff_reduction_avg},
                  {"dsp_reduction_avg", summary.dsp_reduction_avg},
                  {"min_density", summary.min_density},
                  {"max_density", summary.max_density}};
  return j.dump(2);
}

std::vector<SwitchingProfile> switching_profiles() {
  // Per-operation footprints with both datapaths alternating INT8/BF16 work.
  return {
      {"vendor-spatial", {220.0, 310.5, 1.0}, {110.0, 155.3, 0.5}},
      {"temporal-int8-core", {352.0, 467.0, 4.0}, {22.0, 29.2, 0.25}},
      {"packed-unit", {142.0, 128.3, 0.25}, {142.0, 128.3, 0.25}},
  };
}

}  // namespace xtramac
