// Acceptance gate: one line per criterion, exit code = number of failures.
//
// Each criterion prints
//   criterion N: PASS — <what ran, with counts>
// or
//   criterion N: FAIL — <what went wrong>
// so the output is a complete, self-describing record of the run.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "xtramac/analysis.hpp"
#include "xtramac/dsp48.hpp"
#include "xtramac/errors.hpp"
#include "xtramac/formats.hpp"
#include "xtramac/gemv.hpp"
#include "xtramac/oracle.hpp"
#include "xtramac/packing.hpp"
#include "xtramac/pipeline.hpp"

using namespace xtramac;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::uint64_t mask_bits(int w) {
  return w >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << w) - 1);
}

std::string slurp(const std::string& rel) {
#ifndef XTRAMAC_DATA_DIR
#error "XTRAMAC_DATA_DIR must point at the repository data directory"
#endif
  const std::string path = std::string(XTRAMAC_DATA_DIR) + "/" + rel;
  std::ifstream in(path);
  if (!in.good()) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

// Uniform pattern draw with a bias toward special encodings (signed zeros,
// NaN/infinity where encodable, saturation rails, subnormals).
std::uint64_t draw_pattern(std::mt19937_64& rng, const Format& f) {
  const int w = encoding_width(f);
  if (rng() % 8 == 0) {
    if (std::holds_alternative<FloatFormat>(f)) {
      const auto& ff = std::get<FloatFormat>(f);
      std::uint32_t opts[8];
      int n = 0;
      opts[n++] = ff.zero_bits(false);
      opts[n++] = ff.zero_bits(true);
      opts[n++] = ff.max_finite_bits(false);
      opts[n++] = ff.max_finite_bits(true);
      if (ff.all_ones_exp_is_special) opts[n++] = ff.quiet_nan_bits();
      if (ff.encodes_infinity) {
        opts[n++] = ff.inf_bits(false);
        opts[n++] = ff.inf_bits(true);
      }
      if (ff.mant_bits > 0) opts[n++] = 1;  // a subnormal, flushed on decode
      return opts[rng() % n];
    }
    const auto& i = std::get<IntFormat>(f);
    const std::uint64_t m = mask_bits(i.bits);
    const std::uint64_t opts[4] = {0, m, std::uint64_t{1} << (i.bits - 1),
                                   m >> 1};  // 0, -1, min, max
    return opts[rng() % 4];
  }
  return rng() & mask_bits(w);
}

IssueSlot make_slot(int dsel, const MacDatatype& dt,
                    const std::vector<std::uint64_t>& a_ops,
                    const std::vector<std::uint64_t>& b_ops,
                    const std::array<std::uint64_t, kMaxLanes>& c_lanes) {
  IssueSlot s;
  s.valid = true;
  s.dtype_select = dsel;
  const int ea = encoding_width(dt.type_a);
  const int eb = encoding_width(dt.type_b);
  for (std::size_t i = 0; i < a_ops.size(); ++i)
    s.a_word |= a_ops[i] << (i * ea);
  for (std::size_t i = 0; i < b_ops.size(); ++i)
    s.b_word |= b_ops[i] << (i * eb);
  s.c_lanes = c_lanes;
  return s;
}

// Compose the three computation stages (the datapath a pipeline cycle runs)
// and compare every certified lane against the scalar oracle.
std::uint64_t check_slot_vs_oracle(const IssueSlot& slot, const MacDatatype& dt,
                                   const PackingPlan& pl,
                                   const std::vector<std::uint64_t>& a_ops,
                                   const std::vector<std::uint64_t>& b_ops) {
  const Stage1Result s1 = stage1_map(slot, dt, pl);
  const Stage2Result s2 = stage2_product(s1, dt, pl);
  const Stage3Result s3 = stage3_accumulate(s2, s1, slot, dt, pl);
  std::uint64_t bad = 0;
  for (int k = 0; k < pl.lanes; ++k) {
    const LaneField& lf = pl.lane_map[static_cast<std::size_t>(k)];
    const std::uint32_t want =
        oracle_mac(a_ops[static_cast<std::size_t>(lf.a_index)],
                   b_ops[static_cast<std::size_t>(lf.b_index)],
                   slot.c_lanes[static_cast<std::size_t>(k)], dt);
    if (s3.lanes[static_cast<std::size_t>(k)] != want) ++bad;
  }
  return bad;
}

// A pool of distinct 16-bit accumulator patterns, specials first.
std::vector<std::uint64_t> accumulator_pool(std::size_t size,
                                            const FloatFormat& f,
                                            std::uint64_t seed) {
  std::vector<std::uint32_t> all(65536);
  for (std::uint32_t v = 0; v < 65536; ++v) all[v] = v;
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  std::vector<std::uint64_t> pool;
  pool.reserve(size + 8);
  const std::uint32_t specials[] = {
      f.zero_bits(false), f.zero_bits(true),    f.quiet_nan_bits(),
      f.inf_bits(false),  f.inf_bits(true),     f.max_finite_bits(false),
      f.max_finite_bits(true), 0x0001u /* subnormal */};
  for (std::uint32_t s : specials) pool.push_back(s);
  for (std::uint32_t v : all) {
    if (pool.size() >= size) break;
    if (std::find(pool.begin(), pool.begin() + 8, v) == pool.begin() + 8)
      pool.push_back(v);
  }
  return pool;
}

// ---------------------------------------------------------------------------
// criterion 1: the packed datapath is bit-exact against the scalar oracle
// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const Registry reg = Registry::standard();
  std::mt19937_64 rng(0xC1);
  std::uint64_t macs = 0, mismatches = 0;

  // Part A: every fp8xfp8 operand pair, accumulators rotating through a
  // 16384-pattern pool (16 per pair; the pool cycles 64 times).
  {
    const MacDatatype& dt = reg.datatype("fp8xfp8");
    const PackingPlan pl = plan(dt);
    const auto pool =
        accumulator_pool(16384, std::get<FloatFormat>(dt.type_c), 1);
    std::size_t pi = 0;
    std::vector<std::uint64_t> a_ops(pl.a_offsets.size());
    std::vector<std::uint64_t> b_ops(pl.b_offsets.size());
    for (std::uint32_t a = 0; a < 256; ++a) {
      for (std::uint32_t b = 0; b < 256; ++b) {
        std::fill(a_ops.begin(), a_ops.end(), a);
        std::fill(b_ops.begin(), b_ops.end(), b);
        for (int round = 0; round < 4; ++round) {
          std::array<std::uint64_t, kMaxLanes> cs{};
          for (int k = 0; k < pl.lanes; ++k)
            cs[static_cast<std::size_t>(k)] = pool[pi++ % pool.size()];
          const IssueSlot slot = make_slot(0, dt, a_ops, b_ops, cs);
          mismatches += check_slot_vs_oracle(slot, dt, pl, a_ops, b_ops);
          macs += static_cast<std::uint64_t>(pl.lanes);
        }
      }
    }
  }
  const std::uint64_t fp8_macs = macs;

  // Part B: every fp4xfp4 operand pair against the entire accumulator pool.
  {
    const MacDatatype& dt = reg.datatype("fp4xfp4");
    const PackingPlan pl = plan(dt);
    const auto pool =
        accumulator_pool(16384, std::get<FloatFormat>(dt.type_c), 2);
    std::vector<std::uint64_t> a_ops(pl.a_offsets.size());
    std::vector<std::uint64_t> b_ops(pl.b_offsets.size());
    for (std::uint32_t a = 0; a < 16; ++a) {
      for (std::uint32_t b = 0; b < 16; ++b) {
        std::fill(a_ops.begin(), a_ops.end(), a);
        std::fill(b_ops.begin(), b_ops.end(), b);
        for (std::size_t pi = 0; pi < pool.size();
             pi += static_cast<std::size_t>(pl.lanes)) {
          std::array<std::uint64_t, kMaxLanes> cs{};
          for (int k = 0; k < pl.lanes; ++k)
            cs[static_cast<std::size_t>(k)] =
                pool[(pi + static_cast<std::size_t>(k)) % pool.size()];
          const IssueSlot slot = make_slot(0, dt, a_ops, b_ops, cs);
          mismatches += check_slot_vs_oracle(slot, dt, pl, a_ops, b_ops);
          macs += static_cast<std::uint64_t>(pl.lanes);
        }
      }
    }
  }
  const std::uint64_t fp4_macs = macs - fp8_macs;

  // Part C: >= 10^6 randomized triples per datatype with a 16-bit operand,
  // special encodings mixed in.
  int wide_dtypes = 0;
  for (const MacDatatype& dt : reg.datatypes()) {
    if (encoding_width(dt.type_a) != 16 && encoding_width(dt.type_b) != 16)
      continue;
    ++wide_dtypes;
    const PackingPlan pl = plan(dt);
    std::vector<std::uint64_t> a_ops(pl.a_offsets.size());
    std::vector<std::uint64_t> b_ops(pl.b_offsets.size());
    std::uint64_t done = 0;
    while (done < 1000000) {
      for (auto& v : a_ops) v = draw_pattern(rng, dt.type_a);
      for (auto& v : b_ops) v = draw_pattern(rng, dt.type_b);
      std::array<std::uint64_t, kMaxLanes> cs{};
      for (int k = 0; k < pl.lanes; ++k)
        cs[static_cast<std::size_t>(k)] = draw_pattern(rng, dt.type_c);
      const IssueSlot slot = make_slot(0, dt, a_ops, b_ops, cs);
      mismatches += check_slot_vs_oracle(slot, dt, pl, a_ops, b_ops);
      done += static_cast<std::uint64_t>(pl.lanes);
    }
    macs += done;
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::ostringstream d;
  d << "fp8xfp8 all 65536 pairs x16 accumulators from a 16384-pattern pool ("
    << fp8_macs << " MACs), fp4xfp4 all 256 pairs x full pool (" << fp4_macs
    << " MACs), >=10^6 special-biased random triples for each of "
    << wide_dtypes << " 16-bit-operand datatypes; " << mismatches << "/"
    << macs << " mismatches in " << fmt(secs, 1) << "s";
  return {mismatches == 0 && secs < 300.0 && wide_dtypes == 20, d.str()};
}

// ---------------------------------------------------------------------------
// criterion 2: pack -> wide multiply -> extract recovers every lane product
// ---------------------------------------------------------------------------

Outcome criterion2() {
  const Registry reg = Registry::standard();
  std::mt19937_64 rng(0xC2);
  std::uint64_t checks = 0, mismatches = 0;
  int exhaustive_dtypes = 0;

  for (const MacDatatype& dt : reg.datatypes()) {
    const PackingPlan pl = plan(dt);
    const std::size_t na = pl.a_offsets.size(), nb = pl.b_offsets.size();
    const std::uint32_t amax = max_packed_magnitude(dt.type_a);
    const std::uint32_t bmax = max_packed_magnitude(dt.type_b);
    std::vector<std::uint32_t> am(na), bm(nb);
    std::array<std::uint32_t, kMaxLanes> out{};

    auto verify = [&]() {
      const DspPorts ports =
          pack(pl, am.data(), static_cast<int>(na), bm.data(),
               static_cast<int>(nb));
      extract_into(pl, wide_mul(ports), out);
      for (int k = 0; k < pl.lanes; ++k) {
        const LaneField& lf = pl.lane_map[static_cast<std::size_t>(k)];
        const std::uint64_t want =
            static_cast<std::uint64_t>(am[static_cast<std::size_t>(lf.a_index)]) *
            bm[static_cast<std::size_t>(lf.b_index)];
        if (out[static_cast<std::size_t>(k)] != want) ++mismatches;
        ++checks;
      }
    };

    if (amax <= 15 && bmax <= 15) {
      // Both operand fields are at most 4 bits wide: enumerate every
      // magnitude tuple across all positions.
      ++exhaustive_dtypes;
      std::vector<std::uint32_t> odo(na + nb, 0);
      for (;;) {
        for (std::size_t i = 0; i < na; ++i) am[i] = odo[i];
        for (std::size_t i = 0; i < nb; ++i) bm[i] = odo[na + i];
        verify();
        std::size_t p = 0;
        for (; p < odo.size(); ++p) {
          const std::uint32_t lim = p < na ? amax : bmax;
          if (odo[p] < lim) {
            ++odo[p];
            break;
          }
          odo[p] = 0;
        }
        if (p == odo.size()) break;
      }
    } else {
      for (std::uint32_t& v : am) v = amax;  // saturated corner first
      for (std::uint32_t& v : bm) v = bmax;
      verify();
      for (std::uint32_t& v : am) v = 0;
      for (std::uint32_t& v : bm) v = 0;
      verify();
      for (int i = 0; i < 1000000; ++i) {
        for (std::uint32_t& v : am)
          v = static_cast<std::uint32_t>(rng() % (amax + 1ull));
        for (std::uint32_t& v : bm)
          v = static_cast<std::uint32_t>(rng() % (bmax + 1ull));
        verify();
      }
    }
  }

  std::ostringstream d;
  d << "lane recovery exact for all " << reg.datatypes().size()
    << " datatype plans (" << exhaustive_dtypes
    << " with <=4-bit operand fields enumerated exhaustively, 10^6 random "
       "magnitude tuples plus saturated/zero corners otherwise); "
    << mismatches << "/" << checks << " lane mismatches";
  return {mismatches == 0, d.str()};
}

// ---------------------------------------------------------------------------
// criterion 3: constant latency and initiation interval one over a long
// adversarial stream
// ---------------------------------------------------------------------------

Outcome criterion3() {
  const Registry reg = Registry::standard();
  MacConfig cfg;
  cfg.datatypes = reg.datatypes();
  cfg.evaluate_all_paths = true;
  Pipeline pipe(cfg);
  const int lat = pipe.latency();

  std::mt19937_64 rng(0xC3);
  struct Pending {
    std::uint64_t issue_cycle = 0;
    int dsel = 0;
    IssueSlot slot;
    std::vector<std::uint64_t> a_ops, b_ops;
  };
  std::deque<Pending> inflight;
  const std::uint64_t kCycles = 100000;
  std::uint64_t issued = 0, retired = 0, mismatches = 0, latency_errors = 0;
  std::uint64_t expected_serial = 1;

  auto check_output = [&](const MacOutput& out, std::uint64_t now) {
    if (!out.valid) return;
    if (inflight.empty()) {
      ++latency_errors;
      return;
    }
    const Pending p = inflight.front();
    inflight.pop_front();
    ++retired;
    if (now - p.issue_cycle != static_cast<std::uint64_t>(lat))
      ++latency_errors;
    if (out.serial != expected_serial++) ++latency_errors;
    if (out.dtype_select != p.dsel) ++mismatches;
    const MacDatatype& dt = cfg.datatypes[static_cast<std::size_t>(p.dsel)];
    const PackingPlan& pl = pipe.plan_for(p.dsel);
    if (out.lanes != pl.lanes) ++mismatches;
    for (int k = 0; k < pl.lanes; ++k) {
      const LaneField& lf = pl.lane_map[static_cast<std::size_t>(k)];
      const std::uint32_t want =
          oracle_mac(p.a_ops[static_cast<std::size_t>(lf.a_index)],
                     p.b_ops[static_cast<std::size_t>(lf.b_index)],
                     p.slot.c_lanes[static_cast<std::size_t>(k)], dt);
      if (out.lane_bits[static_cast<std::size_t>(k)] != want) ++mismatches;
    }
  };

  for (std::uint64_t i = 0; i < kCycles; ++i) {
    // Mix every datatype: sequential sweep wrapped in random jumps.
    const int dsel = static_cast<int>(
        (i % 3 == 0) ? rng() % cfg.datatypes.size()
                     : i % cfg.datatypes.size());
    const MacDatatype& dt = cfg.datatypes[static_cast<std::size_t>(dsel)];
    const PackingPlan& pl = pipe.plan_for(dsel);
    Pending p;
    p.issue_cycle = i;
    p.dsel = dsel;
    p.a_ops.resize(pl.a_offsets.size());
    p.b_ops.resize(pl.b_offsets.size());
    for (auto& v : p.a_ops) v = draw_pattern(rng, dt.type_a);
    for (auto& v : p.b_ops) v = draw_pattern(rng, dt.type_b);
    std::array<std::uint64_t, kMaxLanes> cs{};
    for (int k = 0; k < pl.lanes; ++k)
      cs[static_cast<std::size_t>(k)] = draw_pattern(rng, dt.type_c);
    p.slot = make_slot(dsel, dt, p.a_ops, p.b_ops, cs);
    const MacOutput out = pipe.step(p.slot);
    inflight.push_back(std::move(p));
    ++issued;
    if (i < static_cast<std::uint64_t>(lat)) {
      if (out.valid) ++latency_errors;  // nothing may retire during fill
    } else if (!out.valid) {
      ++latency_errors;  // initiation interval one: one retirement per cycle
    }
    check_output(out, i);
  }
  // Drain: exactly `lat` more cycles of valid output, then silence.
  for (int i = 0; i < lat + 3; ++i) {
    const MacOutput out = pipe.step(IssueSlot{});
    if (i < lat && !out.valid) ++latency_errors;
    if (i >= lat && out.valid) ++latency_errors;
    check_output(out, kCycles + static_cast<std::uint64_t>(i));
  }

  std::ostringstream d;
  d << issued << "-cycle stream across all " << cfg.datatypes.size()
    << " datatypes with special-value bias: latency constant at " << lat
    << " cycles, one result per cycle once primed (" << retired << "/"
    << issued << " retired, " << latency_errors << " timing violations, "
    << mismatches << " data mismatches)";
  return {latency_errors == 0 && mismatches == 0 && retired == issued,
          d.str()};
}

// ---------------------------------------------------------------------------
// criterion 4: multiplier utilization of the compared architectures
// ---------------------------------------------------------------------------

Outcome criterion4() {
  const Registry reg = Registry::standard();
  const auto scenarios = builtin_scenarios();
  const ScenarioReport temporal = evaluate_scenario(reg, scenarios[0]);
  const ScenarioReport spatial = evaluate_scenario(reg, scenarios[1]);

  struct Checked {
    const char* what;
    double got_pct, want_pct;
  };
  const Checked checks[] = {
      {"temporal BF16", 100 * temporal.modes[1].second.utilization, 8.9},
      {"temporal INT8", 100 * temporal.modes[0].second.utilization, 71.1},
      {"spatial average", 100 * spatial.average_utilization, 26.7},
      {"spatial INT8", 100 * spatial.modes[0].second.utilization, 35.6},
  };
  bool ok = true;
  std::ostringstream d;
  for (const auto& c : checks) {
    const bool hit = std::fabs(c.got_pct - c.want_pct) <= 0.1 + 1e-12;
    ok = ok && hit;
    d << c.what << " " << fmt(c.got_pct, 2) << "% (target " << fmt(c.want_pct, 1)
      << "%" << (hit ? "" : " MISSED") << "); ";
  }
  d << "all within 0.1pp";
  return {ok, d.str()};
}

// ---------------------------------------------------------------------------
// criterion 5: per-operation density ratios at one-decimal rounding
// ---------------------------------------------------------------------------

Outcome criterion5() {
  const auto rows = density_table();
  struct Expect {
    const char* label;
    double lut, ff, dsp;
  };
  const Expect expect[] = {
      {"int2-8 x bf16", 1.4, 1.8, 2.0}, {"int2-8 x fp16", 1.4, 1.9, 2.0},
      {"fp4 x bf16", 1.5, 2.0, 2.0},    {"fp4 x fp16", 1.4, 2.0, 2.0},
      {"fp8 x bf16", 1.4, 1.8, 2.0},    {"fp8 x fp16", 1.4, 2.0, 2.0},
  };
  auto round1 = [](double v) { return std::round(v * 10.0) / 10.0; };
  bool ok = rows.size() == 6;
  int matched = 0;
  for (std::size_t i = 0; ok && i < rows.size(); ++i) {
    const ResourcesPerOp dens = rows[i].density();
    if (rows[i].label == expect[i].label &&
        round1(dens.luts) == expect[i].lut && round1(dens.ffs) == expect[i].ff &&
        round1(dens.dsps) == expect[i].dsp)
      matched += 3;
    else
      ok = false;
  }
  const DensitySummary s = rows.empty() ? DensitySummary{} : summarize(rows);
  std::ostringstream d;
  d << matched << "/18 density ratios match at one decimal across " << rows.size()
    << " operand pairings (range " << fmt(s.min_density, 2) << "x-"
    << fmt(s.max_density, 2) << "x, mean reductions LUT "
    << fmt(s.lut_reduction_avg, 1) << "% / FF " << fmt(s.ff_reduction_avg, 1)
    << "% / DSP " << fmt(s.dsp_reduction_avg, 1) << "%)";
  return {ok && matched == 18, d.str()};
}

// ---------------------------------------------------------------------------
// criterion 6: channel-fed streaming rooflines
// ---------------------------------------------------------------------------

Outcome criterion6() {
  const Registry reg = Registry::standard();
  const GemvEngine e = GemvEngine::from_json(slurp("gemv/u55c-int4.json"));
  const double qkv = roofline_gemv(reg, e, 4096, 4096).seconds * 1e3;
  const double ffn = roofline_gemv(reg, e, 12288, 4096).seconds * 1e3;
  const bool ok_qkv = std::fabs(qkv - 0.0246) / 0.0246 <= 0.05;
  const bool ok_ffn = std::fabs(ffn - 0.0743) / 0.0743 <= 0.05;
  std::ostringstream d;
  d << "4096x4096 " << fmt(qkv, 4) << " ms (target 0.0246 +-5%), 12288x4096 "
    << fmt(ffn, 4) << " ms (target 0.0743 +-5%), both bandwidth-bound";
  const bool bound = roofline_gemv(reg, e, 4096, 4096).bandwidth_bound &&
                     roofline_gemv(reg, e, 12288, 4096).bandwidth_bound;
  return {ok_qkv && ok_ffn && bound, d.str()};
}

// ---------------------------------------------------------------------------
// criterion 7: engine shape arithmetic
// ---------------------------------------------------------------------------

Outcome criterion7() {
  const Registry reg = Registry::standard();
  const GemvEngine e = GemvEngine::from_json(slurp("gemv/u55c-int4.json"));
  const int per_channel = macs_per_channel(reg, e);
  const int max_inst = max_instances(reg, e);
  const int deployed = deployed_instances(reg, e);
  std::ostringstream d;
  d << "512-bit channel / (4-bit weights x 2 lanes) = " << per_channel
    << " MACs per channel (want 64); 32 channels x 64 = " << max_inst
    << " instances (want 2048); " << deployed << " deployed on 30 channels";
  return {per_channel == 64 && max_inst == 2048 && deployed == 1920, d.str()};
}

// ---------------------------------------------------------------------------
// criterion 8: decode latency and packed-vs-upcast speedup bands
// ---------------------------------------------------------------------------

Outcome criterion8() {
  const Registry reg = Registry::standard();
  const Platform plat = Platform::from_json(slurp("platforms/v80.json"));
  const char* models[] = {"models/qwen3-8b-awq.json",
                          "models/llama-3.1-8b-w8a8.json",
                          "models/qwen3-8b-fp8.json",
                          "models/llama-3.1-8b-fp8.json",
                          "models/gpt-oss-20b.json"};
  bool ok = true;
  std::ostringstream d;
  for (const char* path : models) {
    const LlmModel m = LlmModel::from_json(slurp(path));
    const double ms =
        decode_latency(reg, m, plat, plat.packed_unit, 1, 2048).seconds * 1e3;
    const double sp = decode_speedup(reg, m, plat, 32, 512);
    const bool in_band = ms >= 4.4 && ms <= 10.0;
    const bool sp_band = sp >= 1.5 && sp <= 1.8;
    ok = ok && in_band && sp_band;
    d << m.name << " " << fmt(ms, 2) << "ms/" << fmt(sp, 2) << "x"
      << ((in_band && sp_band) ? "" : " OUT-OF-BAND") << "; ";
  }
  d << "batch-1 ctx-2048 latencies in [4.4,10.0] ms, batch-32 ctx-512 "
       "speedups in [1.5,1.8]";
  return {ok, d.str()};
}

// ---------------------------------------------------------------------------
// criterion 9: format and arithmetic property suites
// ---------------------------------------------------------------------------

bool property_round_trip(const Registry& reg, std::string& note) {
  std::uint64_t patterns = 0, failures = 0;
  auto canonical = [](std::uint32_t v, const FloatFormat& f) -> std::uint32_t {
    const bool sign = (v >> (f.width() - 1)) & 1;
    switch (classify(v, Format{f})) {
      case ValueClass::Normal:
        return v;
      case ValueClass::Zero:
      case ValueClass::Subnormal:
        return f.zero_bits(sign);
      case ValueClass::Inf:
        return f.inf_bits(sign);
      case ValueClass::NaN:
        return f.quiet_nan_bits();
    }
    return v;
  };
  auto check_float = [&](std::uint32_t v, const FloatFormat& f) {
    ++patterns;
    if (encode(to_exact(decode(v, f), Format{f}), f) != canonical(v, f))
      ++failures;
  };
  auto check_int = [&](std::uint64_t v, const IntFormat& f) {
    ++patterns;
    const DecodedValue dv = decode(v, Format{f});
    const std::int64_t sv = dv.negative ? -std::int64_t(dv.mantissa)
                                        : std::int64_t(dv.mantissa);
    if ((static_cast<std::uint64_t>(sv) & mask_bits(f.bits)) != v) ++failures;
  };
  const std::uint32_t lo_strata[] = {0x0000, 0x0001, 0x5555, 0x8000, 0xFFFF};
  for (const Format& f : reg.formats()) {
    if (std::holds_alternative<FloatFormat>(f)) {
      const auto& ff = std::get<FloatFormat>(f);
      if (ff.width() <= 16) {
        for (std::uint64_t v = 0; v <= mask_bits(ff.width()); ++v)
          check_float(static_cast<std::uint32_t>(v), ff);
      } else {
        for (std::uint64_t hi = 0; hi < 65536; ++hi)
          for (std::uint32_t lo : lo_strata)
            check_float(static_cast<std::uint32_t>((hi << 16) | lo), ff);
      }
    } else {
      const auto& fi = std::get<IntFormat>(f);
      if (fi.bits <= 16) {
        for (std::uint64_t v = 0; v <= mask_bits(fi.bits); ++v)
          check_int(v, fi);
      } else {
        for (std::uint64_t hi = 0; hi < 65536; ++hi)
          for (std::uint32_t lo : lo_strata)
            check_int((hi << 16) | lo, fi);
      }
    }
  }
  note = "round-trip " + std::to_string(patterns) +
         " patterns (exhaustive <=16-bit, stratified 32-bit), " +
         std::to_string(failures) + " failures";
  return failures == 0;
}

bool property_tie_straddle(const Registry& reg, std::string& note) {
  std::uint64_t straddles = 0, failures = 0;
  for (const Format& f : reg.formats()) {
    if (!std::holds_alternative<FloatFormat>(f)) continue;
    const FloatFormat& ff = std::get<FloatFormat>(f);
    if (ff.width() > 16) continue;
    const std::uint32_t sign_bit = 1u << (ff.width() - 1);
    for (std::uint32_t v = 0; v + 1 < sign_bit; ++v) {
      if (classify(v, f) != ValueClass::Normal ||
          classify(v + 1, f) != ValueClass::Normal)
        continue;
      const DecodedValue d = decode(v, ff);
      const std::uint64_t m = d.mantissa;
      const int e = d.exponent - ff.mant_bits;
      // Exact midpoint of two adjacent encodings: the even mantissa wins.
      const std::uint32_t want_mid = (m % 2 == 0) ? v : v + 1;
      ++straddles;
      if (encode(ExactValue::normal(false, 2 * m + 1, e - 1), ff) != want_mid)
        ++failures;
      if (encode(ExactValue::normal(true, 2 * m + 1, e - 1), ff) !=
          (want_mid | sign_bit))
        ++failures;
      // Quarter-point perturbations round to the nearer neighbour.
      if (encode(ExactValue::normal(false, 4 * m + 1, e - 2), ff) != v)
        ++failures;
      if (encode(ExactValue::normal(false, 4 * m + 3, e - 2), ff) != v + 1)
        ++failures;
    }
  }
  note = "round-to-nearest-even verified on " + std::to_string(straddles) +
         " adjacent-encoding straddles (midpoints both signs + quarter "
         "points), " +
         std::to_string(failures) + " failures";
  return failures == 0;
}

bool property_ftz_daz(const Registry& reg, std::string& note) {
  std::uint64_t patterns = 0, subnormals = 0, failures = 0;
  for (const Format& f : reg.formats()) {
    if (!std::holds_alternative<FloatFormat>(f)) continue;
    const FloatFormat& ff = std::get<FloatFormat>(f);
    if (ff.width() > 16) continue;
    std::uint64_t sub_seen = 0;
    for (std::uint64_t v = 0; v <= mask_bits(ff.width()); ++v) {
      ++patterns;
      const bool sign = (v >> (ff.width() - 1)) & 1;
      const ValueClass cls = classify(v, f);
      const DecodedValue d = decode(v, ff);
      if (d.cls == ValueClass::Subnormal) ++failures;  // inputs always flush
      if (cls == ValueClass::Subnormal) {
        ++sub_seen;
        // Denormals-are-zero: the decoded operand is a signed zero.
        if (d.cls != ValueClass::Zero || d.negative != sign) ++failures;
      }
      if (cls == ValueClass::Normal &&
          (d.cls != ValueClass::Normal || d.mantissa == 0))
        ++failures;
    }
    // Every nonzero mantissa under a zero exponent field, both signs.
    if (sub_seen != 2 * (mask_bits(ff.mant_bits))) ++failures;
    subnormals += sub_seen;
    // Flush-to-zero: halving the smallest normal underflows to signed zero.
    if (encode(ExactValue::normal(false, 1, ff.min_exp() - 1), ff) !=
        ff.zero_bits(false))
      ++failures;
    if (encode(ExactValue::normal(true, 1, ff.min_exp() - 1), ff) !=
        ff.zero_bits(true))
      ++failures;
    if (classify(encode(ExactValue::normal(false, 1, ff.min_exp()), ff), f) !=
        ValueClass::Normal)
      ++failures;
  }
  note = "flush semantics total over " + std::to_string(patterns) +
         " patterns (" + std::to_string(subnormals) +
         " subnormals flushed to signed zero, smallest-normal boundary "
         "checked), " +
         std::to_string(failures) + " failures";
  return failures == 0;
}

bool property_int32_saturation(const Registry& reg, std::string& note) {
  const MacDatatype& dt = reg.datatype("int8xint8");
  std::mt19937_64 rng(0xC9);
  std::uint64_t failures = 0, pos_sat = 0, neg_sat = 0;
  const std::int64_t kMin = -2147483648LL, kMax = 2147483647LL;
  const std::uint64_t kTrials = 10000000;
  for (std::uint64_t i = 0; i < kTrials; ++i) {
    const std::uint64_t a = rng() & 0xFF, b = rng() & 0xFF;
    std::uint64_t c = rng() & 0xFFFFFFFF;
    const int mode = static_cast<int>(rng() % 4);
    if (mode == 0) c = 0x7FFFFF00ull | (rng() & 0x1FF);   // hug the top rail
    if (mode == 1) c = 0x80000000ull | (rng() & 0x1FF);   // hug the bottom rail
    const std::int64_t av = static_cast<std::int8_t>(a);
    const std::int64_t bv = static_cast<std::int8_t>(b);
    const std::int64_t cv = static_cast<std::int32_t>(c);
    std::int64_t sum = cv + av * bv;
    if (sum > kMax) {
      sum = kMax;
      ++pos_sat;
    } else if (sum < kMin) {
      sum = kMin;
      ++neg_sat;
    }
    const std::uint32_t want =
        static_cast<std::uint32_t>(static_cast<std::uint64_t>(sum));
    if (oracle_mac(a, b, c, dt) != want) ++failures;
  }
  note = "10^7 int8xint8 accumulations vs a 64-bit reference with clamping (" +
         std::to_string(pos_sat) + " saturations at the top rail, " +
         std::to_string(neg_sat) + " at the bottom), " +
         std::to_string(failures) + " failures";
  return failures == 0 && pos_sat > 0 && neg_sat > 0;
}

bool property_superlinearity(std::string& note) {
  bool ok = true;
  for (int w : {4, 8, 16, 32}) {
    ok = ok && fp_adder_cost(2 * w) > 2 * fp_adder_cost(w);
    ok = ok && std::fabs(int_adder_cost(2 * w) - 2 * int_adder_cost(w)) < 1e-12;
  }
  note = std::string("float adder cost superlinear (w log w) and integer "
                     "adder cost linear at w in {4,8,16,32}: ") +
         (ok ? "holds" : "violated");
  return ok;
}

Outcome criterion9() {
  const Registry reg = Registry::standard();
  std::string notes[5];
  const bool ok = property_round_trip(reg, notes[0]) &
                  property_tie_straddle(reg, notes[1]) &
                  property_ftz_daz(reg, notes[2]) &
                  property_int32_saturation(reg, notes[3]) &
                  property_superlinearity(notes[4]);
  std::string d = notes[0];
  for (int i = 1; i < 5; ++i) d += "; " + notes[i];
  return {ok, d};
}

}  // namespace

int main() {
  Outcome (*criteria[])() = {criterion1, criterion2, criterion3,
                             criterion4, criterion5, criterion6,
                             criterion7, criterion8, criterion9};
  int failures = 0;
  for (int i = 0; i < 9; ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << "criterion " << (i + 1) << ": " << (o.pass ? "PASS" : "FAIL")
              << " — " << o.detail << std::endl;
  }
  std::cout << (9 - failures) << "/9 criteria passed" << std::endl;
  return failures;
}
