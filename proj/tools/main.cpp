// Command-line front end: vector generation/checking, packing reports,
// utilization and density studies, GEMV simulation, and decode modelling.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xtramac/analysis.hpp"
#include "xtramac/errors.hpp"
#include "xtramac/formats.hpp"
#include "xtramac/gemv.hpp"
#include "xtramac/oracle.hpp"
#include "xtramac/packing.hpp"
#include "xtramac/pipeline.hpp"
#include "xtramac/vectors.hpp"

namespace {

using namespace xtramac;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Format registry discovery: --config flag, then XTRAMAC_CONFIG, then
/// ./xtramac.json, then the built-in registry.
Registry load_registry(const std::string& flag_path) {
  std::string path = flag_path;
  bool required = !path.empty();
  if (path.empty()) {
    if (const char* env = std::getenv("XTRAMAC_CONFIG")) {
      path = env;
      required = true;
    }
  }
  if (path.empty()) {
    std::ifstream probe("xtramac.json");
    if (probe) path = "xtramac.json";
  }
  if (path.empty()) return Registry::standard();
  if (required) return Registry::from_json(read_file(path));
  return Registry::from_json(read_file(path));
}

std::uint64_t parse_hex_arg(const std::string& s, const char* what) {
  if (s.empty() || s.size() > 16)
    throw ConfigError(std::string(what) + ": expected a hex pattern");
  std::uint64_t v = 0;
  for (char ch : s) {
    int d;
    if (ch >= '0' && ch <= '9') d = ch - '0';
    else if (ch >= 'a' && ch <= 'f') d = ch - 'a' + 10;
    else if (ch >= 'A' && ch <= 'F') d = ch - 'A' + 10;
    else
      throw ConfigError(std::string(what) + ": expected a hex pattern");
    v = (v << 4) | static_cast<std::uint64_t>(d);
  }
  return v;
}

RoundingMode parse_mode(const std::string& s) {
  if (s == "unfused") return RoundingMode::Unfused;
  if (s == "fused") return RoundingMode::Fused;
  throw ConfigError("mode must be 'unfused' or 'fused'");
}

/// Issue one record through the cycle model with the operands replicated
/// across every packed lane; returns the retiring output.
MacOutput run_replicated(Pipeline& pipe, int dtype_index,
                         const MacDatatype& dt, const PackingPlan& pl,
                         const VectorRecord& r) {
  IssueSlot slot;
  slot.valid = true;
  slot.dtype_select = dtype_index;
  const int enc_a = encoding_width(dt.type_a);
  const int enc_b = encoding_width(dt.type_b);
  for (std::size_t i = 0; i < pl.a_offsets.size(); ++i)
    slot.a_word |= r.a << (i * enc_a);
  for (std::size_t j = 0; j < pl.b_offsets.size(); ++j)
    slot.b_word |= r.b << (j * enc_b);
  for (int k = 0; k < pl.lanes; ++k) slot.c_lanes[k] = r.c;

  MacOutput out = pipe.step(slot);
  while (!out.valid) out = pipe.step(IssueSlot{});
  return out;
}

int cmd_mac_gen(const Registry& reg, const std::string& datatype, int count,
                std::uint64_t seed, const std::string& mode,
                const std::string& out_path) {
  auto records = generate_vectors(reg, datatype, count, seed, parse_mode(mode));
  if (out_path.empty() || out_path == "-") {
    write_vectors(std::cout, reg, records);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + out_path + "'");
    write_vectors(out, reg, records);
  }
  return 0;
}

int cmd_mac_run(const Registry& reg, const std::string& datatype,
                const std::string& a, const std::string& b,
                const std::string& c, const std::string& mode) {
  const MacDatatype& dt = reg.datatype(datatype);
  VectorRecord r;
  r.datatype = datatype;
  r.a = parse_hex_arg(a, "--a");
  r.b = parse_hex_arg(b, "--b");
  r.c = parse_hex_arg(c, "--c");
  auto check_width = [&](std::uint64_t v, const Format& f, const char* what) {
    const int w = encoding_width(f);
    if (w < 64 && (v >> w) != 0)
      throw ConfigError(std::string(what) + " exceeds the encoding width of " +
                        format_name(f));
  };
  check_width(r.a, dt.type_a, "--a");
  check_width(r.b, dt.type_b, "--b");
  check_width(r.c, dt.type_c, "--c");
  r.p = oracle_mac(r.a, r.b, r.c, dt, parse_mode(mode));
  std::cout << kVectorHeader << '\n' << format_record(reg, r) << '\n';
  return 0;
}

int cmd_mac_check(const Registry& reg, const std::string& path) {
  std::vector<VectorRecord> records;
  if (path.empty() || path == "-") {
    records = read_vectors(std::cin, reg);
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    records = read_vectors(in, reg);
  }

  MacConfig cfg;
  cfg.datatypes = reg.datatypes();
  cfg.evaluate_all_paths = false;
  Pipeline pipe(cfg);
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < cfg.datatypes.size(); ++i)
    index[cfg.datatypes[i].id] = static_cast<int>(i);

  std::uint64_t mismatches = 0;
  for (std::size_t n = 0; n < records.size(); ++n) {
    const VectorRecord& r = records[n];
    const int di = index.at(r.datatype);
    const MacDatatype& dt = cfg.datatypes[di];
    const PackingPlan& pl = pipe.plan_for(di);
    const MacOutput out = run_replicated(pipe, di, dt, pl, r);
    for (int k = 0; k < out.lanes; ++k) {
      if (out.lane_bits[k] != r.p) {
        ++mismatches;
        std::cerr << "record " << (n + 1) << " lane " << k << ": got 0x"
                  << std::hex << out.lane_bits[k] << ", expected 0x" << r.p
                  << std::dec << '\n';
      }
    }
  }
  std::cout << records.size() << " records, " << mismatches << " mismatches\n";
  return mismatches == 0 ? 0 : 1;
}

int cmd_pack_plan(const Registry& reg, const std::string& datatype, int guard,
                  bool json_only, bool all) {
  if (all) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& dt : reg.datatypes()) {
      const PackingPlan pl = plan(dt, guard);
      arr.push_back({{"datatype", dt.id},
                     {"lanes", pl.lanes},
                     {"pattern", to_string(pl.pattern)},
                     {"stride", pl.stride},
                     {"port_bound", pl.port_bound}});
    }
    nlohmann::json j;
    j["schema_version"] = 1;
    j["plans"] = arr;
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  const PackingPlan pl = plan(reg.datatype(datatype), guard);
  std::cout << pl.to_json() << '\n';
  if (!json_only) std::cout << pl.layout_diagram();
  return 0;
}

int cmd_util_report(const Registry& reg) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["scenarios"] = nlohmann::json::array();
  for (const auto& s : builtin_scenarios())
    j["scenarios"].push_back(
        nlohmann::json::parse(evaluate_scenario(reg, s).to_json()));
  j["single_lane"] = nlohmann::json::object();
  for (const auto& dt : reg.datatypes())
    j["single_lane"][dt.id] = single_lane_utilization(reg, dt.id);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_util_cost(int width, double alpha, double beta) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["width"] = width;
  j["int_adder"] = int_adder_cost(width, alpha);
  j["fp_adder"] = fp_adder_cost(width, beta);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_util_density() {
  const auto rows = density_table();
  std::cout << to_json(rows, summarize(rows)) << '\n';
  return 0;
}

int cmd_gemv_sim(const Registry& reg, int rows, int cols,
                 const std::vector<std::string>& tile_specs,
                 std::uint64_t seed) {
  GemvProblem prob;
  prob.rows = rows;
  prob.cols = cols;
  if (tile_specs.empty())
    throw ConfigError("gemv sim: at least one --tile datatype:cols required");
  for (const auto& spec : tile_specs) {
    const auto colon = spec.rfind(':');
    if (colon == std::string::npos)
      throw ConfigError("gemv sim: tile spec must be datatype:cols");
    GemvTile t;
    t.datatype = spec.substr(0, colon);
    t.columns = std::stoi(spec.substr(colon + 1));
    prob.tiles.push_back(std::move(t));
  }

  std::mt19937_64 rng(seed);
  auto draw = [&rng](int bits) {
    return rng() & ((std::uint64_t{1} << bits) - 1);
  };
  prob.weights.assign(
      static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0);
  prob.activations.assign(static_cast<std::size_t>(cols), 0);
  int col = 0;
  for (const auto& t : prob.tiles) {
    const MacDatatype& dt = reg.datatype(t.datatype);
    const int enc_a = encoding_width(dt.type_a);
    const int enc_b = encoding_width(dt.type_b);
    for (int c = 0; c < t.columns && col < cols; ++c, ++col) {
      prob.activations[col] = draw(enc_b);
      for (int r = 0; r < rows; ++r)
        prob.weights[static_cast<std::size_t>(r) * cols + col] = draw(enc_a);
    }
  }

  const GemvResult res = simulate_gemv(reg, prob);

  // Golden cross-check: an independent left fold through the oracle.
  std::uint64_t mismatches = 0;
  for (int r = 0; r < rows; ++r) {
    std::uint64_t acc = 0;
    int cc = 0;
    for (const auto& t : prob.tiles) {
      const MacDatatype& dt = reg.datatype(t.datatype);
      for (int c = 0; c < t.columns; ++c, ++cc)
        acc = oracle_mac(
            prob.weights[static_cast<std::size_t>(r) * cols + cc],
            prob.activations[cc], acc, dt);
    }
    if (acc != res.outputs[r]) ++mismatches;
  }

  nlohmann::json j;
  j["schema_version"] = 1;
  j["rows"] = rows;
  j["cols"] = cols;
  j["lane_parallelism"] = res.lane_parallelism;
  j["row_groups"] = res.row_groups;
  j["cycles"] = res.cycles;
  j["verified_against_oracle"] = mismatches == 0;
  j["mismatches"] = mismatches;
  std::cout << j.dump(2) << '\n';
  return mismatches == 0 ? 0 : 1;
}

int cmd_gemv_roofline(const Registry& reg, const std::string& engine_path,
                      int rows, int cols) {
  const GemvEngine e = GemvEngine::from_json(read_file(engine_path));
  const RooflineEstimate r = roofline_gemv(reg, e, rows, cols);
  nlohmann::json j;
  j["schema_version"] = 1;
  j["engine"] = e.name;
  j["datatype"] = e.datatype;
  j["rows"] = rows;
  j["cols"] = cols;
  j["macs_per_channel"] = macs_per_channel(reg, e);
  j["max_instances"] = max_instances(reg, e);
  j["deployed_instances"] = deployed_instances(reg, e);
  j["seconds"] = r.seconds;
  j["milliseconds"] = r.seconds * 1e3;
  j["stream_seconds"] = r.stream_seconds;
  j["compute_seconds"] = r.compute_seconds;
  j["bandwidth_bound"] = r.bandwidth_bound;
  std::cout << j.dump(2) << '\n';
  return 0;
}

nlohmann::json phase_json(const DecodePhase& p) {
  return {{"seconds", p.seconds},
          {"stream_seconds", p.stream_seconds},
          {"compute_seconds", p.compute_seconds},
          {"compute_bound", p.compute_bound}};
}

nlohmann::json latency_json(const DecodeLatency& l) {
  return {{"seconds", l.seconds},
          {"milliseconds", l.seconds * 1e3},
          {"projection", phase_json(l.projection)},
          {"attention", phase_json(l.attention)},
          {"lm_head", phase_json(l.lm_head)}};
}

int cmd_llm_decode(const Registry& reg, const std::string& model_path,
                   const std::string& platform_path, int batch, int context) {
  const LlmModel m = LlmModel::from_json(read_file(model_path));
  const Platform p = Platform::from_json(read_file(platform_path));
  const DecodeLatency packed =
      decode_latency(reg, m, p, p.packed_unit, batch, context);
  const DecodeLatency upcast =
      decode_latency(reg, m, p, p.upcast_unit, batch, context);

  nlohmann::json j;
  j["schema_version"] = 1;
  j["model"] = m.name;
  j["platform"] = p.name;
  j["batch"] = batch;
  j["context"] = context;
  j["packed_lanes"] = p.lanes(p.packed_unit);
  j["upcast_lanes"] = p.lanes(p.upcast_unit);
  j["packed"] = latency_json(packed);
  j["upcast"] = latency_json(upcast);
  j["speedup"] = upcast.seconds / packed.seconds;
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Packed multiply-accumulate simulator and verification tool"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path,
                 "Format registry JSON (default: XTRAMAC_CONFIG, then "
                 "./xtramac.json, then built-in)");

  // mac
  auto* mac = app.add_subcommand("mac", "Multiply-accumulate vectors");
  mac->require_subcommand(1);
  std::string datatype, a_hex, b_hex, c_hex, mode = "unfused";
  std::string out_path, in_path;
  int count = 1000;
  std::uint64_t seed = 1;
  auto* gen = mac->add_subcommand("gen", "Generate golden vectors");
  gen->add_option("--datatype", datatype)->required();
  gen->add_option("--count", count);
  gen->add_option("--seed", seed);
  gen->add_option("--mode", mode)->check(CLI::IsMember({"unfused", "fused"}));
  gen->add_option("-o,--output", out_path);
  auto* run = mac->add_subcommand("run", "One operation, oracle result");
  run->add_option("--datatype", datatype)->required();
  run->add_option("--a", a_hex)->required();
  run->add_option("--b", b_hex)->required();
  run->add_option("--c", c_hex)->required();
  run->add_option("--mode", mode)->check(CLI::IsMember({"unfused", "fused"}));
  auto* check = mac->add_subcommand(
      "check", "Replay vectors through the cycle model and compare");
  check->add_option("file", in_path, "Vector file ('-' for stdin)");

  // pack
  auto* pack = app.add_subcommand("pack", "Operand packing layouts");
  pack->require_subcommand(1);
  int guard = 1;
  bool json_only = false, all_plans = false;
  auto* plan_cmd = pack->add_subcommand("plan", "Certify a packing layout");
  plan_cmd->add_option("--datatype", datatype);
  plan_cmd->add_option("--guard", guard);
  plan_cmd->add_flag("--json", json_only, "Suppress the layout diagram");
  plan_cmd->add_flag("--all", all_plans, "Summarize every datatype");

  // util
  auto* util = app.add_subcommand("util", "Utilization and cost studies");
  util->require_subcommand(1);
  auto* report = util->add_subcommand("report", "Utilization scenarios");
  (void)report;
  int width = 8;
  double alpha = 1.0, beta = 1.0;
  auto* cost = util->add_subcommand("cost", "Adder cost model");
  cost->add_option("--width", width)->required();
  cost->add_option("--alpha", alpha);
  cost->add_option("--beta", beta);
  auto* density = util->add_subcommand("density", "Per-op resource density");
  (void)density;

  // gemv
  auto* gemv = app.add_subcommand("gemv", "Streaming GEMV");
  gemv->require_subcommand(1);
  int rows = 1, cols = 64, batch = 1, context = 512;
  std::vector<std::string> tile_specs;
  std::string engine_path, model_path, platform_path;
  auto* sim = gemv->add_subcommand("sim", "Bit-exact tiled simulation");
  sim->add_option("--rows", rows)->required();
  sim->add_option("--cols", cols)->required();
  sim->add_option("--tile", tile_specs, "datatype:cols, repeatable")
      ->required();
  sim->add_option("--seed", seed);
  auto* roof = gemv->add_subcommand("roofline", "First-order time estimate");
  roof->add_option("--engine", engine_path)->required();
  roof->add_option("--rows", rows)->required();
  roof->add_option("--cols", cols)->required();

  // llm
  auto* llm = app.add_subcommand("llm", "Decode-stage platform model");
  llm->require_subcommand(1);
  auto* decode = llm->add_subcommand("decode", "One decode step");
  decode->add_option("--model", model_path)->required();
  decode->add_option("--platform", platform_path)->required();
  decode->add_option("--batch", batch);
  decode->add_option("--context", context);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const Registry reg = load_registry(config_path);
    if (gen->parsed())
      return cmd_mac_gen(reg, datatype, count, seed, mode, out_path);
    if (run->parsed())
      return cmd_mac_run(reg, datatype, a_hex, b_hex, c_hex, mode);
    if (check->parsed()) return cmd_mac_check(reg, in_path);
    if (plan_cmd->parsed()) {
      if (!all_plans && datatype.empty())
        throw ConfigError("pack plan: --datatype or --all required");
      return cmd_pack_plan(reg, datatype, guard, json_only, all_plans);
    }
    if (report->parsed()) return cmd_util_report(reg);
    if (cost->parsed()) return cmd_util_cost(width, alpha, beta);
    if (density->parsed()) return cmd_util_density();
    if (sim->parsed()) return cmd_gemv_sim(reg, rows, cols, tile_specs, seed);
    if (roof->parsed()) return cmd_gemv_roofline(reg, engine_path, rows, cols);
    if (decode->parsed())
      return cmd_llm_decode(reg, model_path, platform_path, batch, context);
    std::cerr << "no command\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
}
