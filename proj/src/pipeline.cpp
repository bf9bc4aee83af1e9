#include "xtramac/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <ostream>
#include <string>
#include <utility>

#include "xtramac/dsp48.hpp"
#include "xtramac/errors.hpp"

namespace xtramac {

namespace {

std::uint64_t field(std::uint64_t word, int index, int width) {
  return (word >> (index * width)) & ((std::uint64_t{1} << width) - 1);
}

std::uint32_t overflow_bits(bool negative, const FloatFormat& f) {
  if (f.encodes_infinity) return f.inf_bits(negative);
  if (f.all_ones_exp_is_special) return f.quiet_nan_bits();
  return f.max_finite_bits(negative);
}

// Round-to-nearest-even of +/- mag * 2^exp2 into `f`, flushing results whose
// rounded exponent sits below the minimum normal and saturating on overflow.
// Narrow-frame counterpart of the wide encode: everything fits in 64 bits.
std::uint32_t round_dyadic_hw(std::uint64_t mag, int exp2, bool negative,
                              const FloatFormat& f) {
  const int prec = f.mant_bits + 1;
  const int len = std::bit_width(mag);
  int exp = exp2 + len - 1;  // unbiased exponent of the leading one
  std::uint64_t kept;
  if (len <= prec) {
    kept = mag << (prec - len);
  } else {
    const int drop = len - prec;
    kept = mag >> drop;
    const std::uint64_t rem = mag & ((std::uint64_t{1} << drop) - 1);
    const std::uint64_t half = std::uint64_t{1} << (drop - 1);
    if (rem > half || (rem == half && (kept & 1))) {
      if (++kept == (std::uint64_t{1} << prec)) {
        kept >>= 1;
        ++exp;
      }
    }
  }
  if (exp > f.max_exp()) return overflow_bits(negative, f);
  if (exp < f.min_exp()) return f.zero_bits(negative);
  const auto mant = static_cast<std::uint32_t>(kept) & ((1u << f.mant_bits) - 1);
  const auto e_field = static_cast<std::uint32_t>(exp + f.bias());
  return (static_cast<std::uint32_t>(negative) << (f.width() - 1)) |
         (e_field << f.mant_bits) | mant;
}

void set_flags(const DecodedValue& v, bool& nan, bool& inf, bool& zero,
               bool& sign) {
  nan = v.cls == ValueClass::NaN;
  inf = v.cls == ValueClass::Inf;
  zero = v.cls == ValueClass::Zero;
  sign = v.negative;
}

}  // namespace

Stage1Result stage1_map(const IssueSlot& slot, const MacDatatype& dt,
                        const PackingPlan& plan) {
  const int enc_a = encoding_width(dt.type_a);
  const int enc_b = encoding_width(dt.type_b);
  const int n_a = static_cast<int>(plan.a_offsets.size());
  const int n_b = static_cast<int>(plan.b_offsets.size());

  std::array<DecodedValue, kMaxLanes> da{}, db{};
  std::array<std::uint32_t, kMaxLanes> ma{}, mb{};
  for (int i = 0; i < n_a; ++i) {
    da[i] = decode(field(slot.a_word, i, enc_a), dt.type_a);
    ma[i] = da[i].cls == ValueClass::Normal ? da[i].mantissa : 0;
  }
  for (int j = 0; j < n_b; ++j) {
    db[j] = decode(field(slot.b_word, j, enc_b), dt.type_b);
    mb[j] = db[j].cls == ValueClass::Normal ? db[j].mantissa : 0;
  }

  Stage1Result r;
  r.ports = pack(plan, ma.data(), n_a, mb.data(), n_b);

  const int enc_c = encoding_width(dt.type_c);
  const int bias_p = dt.int_accumulate() ? 0 : dt.fp_out().bias();
  for (int k = 0; k < plan.lanes; ++k) {
    const LaneField& lf = plan.lane_map[k];
    const DecodedValue& a = da[lf.a_index];
    const DecodedValue& b = db[lf.b_index];
    // Tap only this datatype's wires: a slot issued for a wider-accumulator
    // datatype carries high bits this decoder must never see.
    const DecodedValue c = decode(field(slot.c_lanes[k], 0, enc_c), dt.type_c);
    LaneMeta& m = r.lanes[k];
    set_flags(a, m.flags.a_nan, m.flags.a_inf, m.flags.a_zero, m.flags.a_sign);
    set_flags(b, m.flags.b_nan, m.flags.b_inf, m.flags.b_zero, m.flags.b_sign);
    set_flags(c, m.flags.c_nan, m.flags.c_inf, m.flags.c_zero, m.flags.c_sign);
    // Exponents are carried rebased to the output bias; non-normal operands
    // (and integer operands, whose logical exponent is zero) carry the bias.
    m.a_exp_biased = a.exponent + bias_p;
    m.b_exp_biased = b.exponent + bias_p;
  }
  return r;
}

Stage2Result stage2_product(const Stage1Result& s1, const MacDatatype& dt,
                            const PackingPlan& plan) {
  const std::uint64_t wide = wide_mul(s1.ports);
  std::array<std::uint32_t, kMaxLanes> raw{};
  extract_into(plan, wide, raw);

  Stage2Result r;
  const int width = plan.a_width + plan.b_width;
  const int fa = frac_bits(dt.type_a);
  const int fb = frac_bits(dt.type_b);
  const bool fp = !dt.int_accumulate();
  const int bias_p = fp ? dt.fp_out().bias() : 0;

  for (int k = 0; k < plan.lanes; ++k) {
    const LaneMeta& m = s1.lanes[k];
    const bool sign = m.flags.a_sign != m.flags.b_sign;
    Stage2Lane& lane = r.lanes[k];
    lane.int_value = sign ? -static_cast<std::int64_t>(raw[k])
                          : static_cast<std::int64_t>(raw[k]);
    if (!fp) continue;

    const FloatFormat& out = dt.fp_out();
    if (m.flags.a_nan || m.flags.b_nan || (m.flags.a_inf && m.flags.b_zero) ||
        (m.flags.b_inf && m.flags.a_zero)) {
      lane.fp_bits = out.quiet_nan_bits();
    } else if (m.flags.a_inf || m.flags.b_inf) {
      lane.fp_bits =
          out.encodes_infinity ? out.inf_bits(sign) : out.quiet_nan_bits();
    } else if (m.flags.a_zero || m.flags.b_zero) {
      lane.fp_bits = out.zero_bits(sign);
    } else {
      // Leading-zero normalization within the full product frame, then one
      // round into the accumulator format.
      const int e_sum = (m.a_exp_biased - bias_p) + (m.b_exp_biased - bias_p);
      const int len = std::bit_width(raw[k]);
      const int delta = width - len;
      const std::uint64_t mant = std::uint64_t{raw[k]} << delta;
      const int e_norm = e_sum - (fa + fb) + (width - 1) - delta;
      lane.fp_bits = round_dyadic_hw(mant, e_norm - (width - 1), sign, out);
    }
  }
  return r;
}

Stage3Result stage3_accumulate(const Stage2Result& s2, const Stage1Result& s1,
                               const IssueSlot& slot, const MacDatatype& dt,
                               const PackingPlan& plan) {
  Stage3Result r;
  if (dt.int_accumulate()) {
    const auto& acc = std::get<IntFormat>(dt.type_p);
    const std::uint64_t mask = (std::uint64_t{1} << acc.bits) - 1;
    for (int k = 0; k < plan.lanes; ++k) {
      const DecodedValue c = decode(slot.c_lanes[k], acc);
      const std::int64_t cv =
          c.negative ? -static_cast<std::int64_t>(c.mantissa)
                     : static_cast<std::int64_t>(c.mantissa);
      const std::int64_t sum = std::clamp(cv + s2.lanes[k].int_value,
                                          acc.min_value(), acc.max_value());
      r.lanes[k] =
          static_cast<std::uint32_t>(static_cast<std::uint64_t>(sum) & mask);
    }
  } else {
    const FloatFormat& out = dt.fp_out();
    for (int k = 0; k < plan.lanes; ++k) {
      const SpecialFlags& fl = s1.lanes[k].flags;
      const bool product_nan = fl.a_nan || fl.b_nan ||
                               (fl.a_inf && fl.b_zero) ||
                               (fl.b_inf && fl.a_zero);
      if (product_nan || fl.c_nan) {
        r.lanes[k] = out.quiet_nan_bits();
        continue;
      }
      r.lanes[k] = fp_add_hw(s2.lanes[k].fp_bits,
                             static_cast<std::uint32_t>(slot.c_lanes[k]), out);
    }
  }
  return r;
}

std::uint64_t assemble_output(const Stage3Result& s3, const MacDatatype& dt,
                              int lanes) {
  const int w = encoding_width(dt.type_p);
  std::uint64_t word = 0;
  for (int k = 0; k < lanes; ++k)
    word |= std::uint64_t{s3.lanes[k]} << (k * w);
  return word;
}

std::uint32_t fp_add_hw(std::uint32_t x_bits, std::uint32_t y_bits,
                        const FloatFormat& f) {
  const DecodedValue x = decode(x_bits, f);
  const DecodedValue y = decode(y_bits, f);

  if (x.cls == ValueClass::NaN || y.cls == ValueClass::NaN)
    return f.quiet_nan_bits();
  if (x.cls == ValueClass::Inf && y.cls == ValueClass::Inf)
    return x.negative == y.negative ? f.inf_bits(x.negative)
                                    : f.quiet_nan_bits();
  if (x.cls == ValueClass::Inf) return f.inf_bits(x.negative);
  if (y.cls == ValueClass::Inf) return f.inf_bits(y.negative);
  if (x.cls == ValueClass::Zero && y.cls == ValueClass::Zero)
    return f.zero_bits(x.negative && y.negative);
  // The remaining operand is Normal here, so its pattern is already exact.
  if (x.cls == ValueClass::Zero) return y_bits;
  if (y.cls == ValueClass::Zero) return x_bits;

  const int p = f.mant_bits + 1;
  const bool swap = (y.exponent > x.exponent) ||
                    (y.exponent == x.exponent && y.mantissa > x.mantissa);
  const DecodedValue& hi = swap ? y : x;
  const DecodedValue& lo = swap ? x : y;
  const int gap = hi.exponent - lo.exponent;

  // Align both mantissas in a 2p+3 bit frame: hi fully left, lo `gap`
  // positions below it. The alignment shifter is bounded at p+3 positions;
  // bits pushed past it collapse into a sticky LSB, which at that distance
  // can only ever matter as an inexactness marker.
  const int cap = p + 3;
  const std::uint64_t hm = std::uint64_t{hi.mantissa} << cap;
  std::uint64_t lm;
  if (gap <= cap) {
    lm = std::uint64_t{lo.mantissa} << (cap - gap);
  } else {
    const int drop = gap - cap;
    if (drop >= 32) {
      lm = 1;  // a normal mantissa is nonzero, so only stickiness survives
    } else {
      lm = std::uint64_t{lo.mantissa} >> drop;
      if (std::uint64_t{lo.mantissa} & ((std::uint64_t{1} << drop) - 1))
        lm |= 1;
    }
  }

  std::uint64_t frame;
  if (hi.negative == lo.negative) {
    frame = hm + lm;
  } else {
    frame = hm - lm;  // the ordering guarantees hi >= lo in magnitude
    if (frame == 0) return f.zero_bits(false);  // exact cancellation
  }
  // Frame scale: hi.mantissa * 2^(hi.exponent - (p-1)) was shifted up by cap.
  return round_dyadic_hw(frame, hi.exponent - (p - 1) - cap, hi.negative, f);
}

Pipeline::Pipeline(MacConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.datatypes.empty())
    throw ConfigError("pipeline: at least one datatype is required");
  for (int d : cfg_.stage_depths)
    if (d < 1) throw ConfigError("pipeline: stage depths must be >= 1");
  plans_.reserve(cfg_.datatypes.size());
  for (const auto& dt : cfg_.datatypes) {
    dt.validate();
    plans_.push_back(plan(dt, cfg_.guard));
    max_lanes_ = std::max(max_lanes_, plans_.back().lanes);
  }
}

const PackingPlan& Pipeline::plan_for(int dtype_select) const {
  if (dtype_select < 0 ||
      dtype_select >= static_cast<int>(plans_.size()))
    throw ConfigError("pipeline: datatype select out of range");
  return plans_[dtype_select];
}

void Pipeline::check_slot(const IssueSlot& slot) const {
  if (slot.dtype_select < 0 ||
      slot.dtype_select >= static_cast<int>(cfg_.datatypes.size()))
    throw ConfigError("pipeline: datatype select out of range");
  const auto& dt = cfg_.datatypes[slot.dtype_select];
  const auto& pl = plans_[slot.dtype_select];
  const int enc_c = encoding_width(dt.type_c);
  for (int k = 0; k < pl.lanes; ++k) {
    if (enc_c < 64 && (slot.c_lanes[k] >> enc_c) != 0)
      throw ConfigError("pipeline: C operand exceeds its encoding width");
  }
}

MacOutput Pipeline::step(const IssueSlot& slot) {
  const int d0 = cfg_.stage_depths[0];
  const int d01 = d0 + cfg_.stage_depths[1];
  const int lat = latency();

  for (Txn& t : inflight_) {
    ++t.age;
    if (!t.valid) continue;
    const auto& dt = cfg_.datatypes[t.slot.dtype_select];
    const auto& pl = plans_[t.slot.dtype_select];
    if (t.age == d0) {
      t.s2 = stage2_product(t.s1, dt, pl);
    } else if (t.age == d01) {
      t.s3 = stage3_accumulate(t.s2, t.s1, t.slot, dt, pl);
      if (cfg_.evaluate_all_paths) {
        // The hardware always clocks both accumulation paths and selects
        // afterwards; mirror the non-selected one and discard its result.
        if (dt.int_accumulate()) {
          for (const auto& other : cfg_.datatypes) {
            if (other.int_accumulate()) continue;
            const FloatFormat& out = other.fp_out();
            for (int k = 0; k < pl.lanes; ++k) {
              volatile std::uint32_t sink = fp_add_hw(
                  t.s2.lanes[k].fp_bits,
                  static_cast<std::uint32_t>(
                      t.slot.c_lanes[k] &
                      ((std::uint64_t{1} << out.width()) - 1)),
                  out);
              (void)sink;
            }
            break;
          }
        } else {
          for (int k = 0; k < pl.lanes; ++k) {
            const std::int64_t cv =
                static_cast<std::int32_t>(t.slot.c_lanes[k]);
            volatile std::int64_t sink =
                std::clamp(cv + t.s2.lanes[k].int_value,
                           std::int64_t{INT32_MIN}, std::int64_t{INT32_MAX});
            (void)sink;
          }
        }
      }
    }
  }

  MacOutput out;
  if (!inflight_.empty() && inflight_.front().age == lat) {
    Txn t = std::move(inflight_.front());
    inflight_.pop_front();
    if (t.valid) {
      const auto& dt = cfg_.datatypes[t.slot.dtype_select];
      const auto& pl = plans_[t.slot.dtype_select];
      out.valid = true;
      out.serial = t.serial;
      out.dtype_select = t.slot.dtype_select;
      out.lanes = pl.lanes;
      out.lane_bits = t.s3.lanes;
      for (int k = 0; k < pl.lanes; ++k) out.flags[k] = t.s1.lanes[k].flags;
      out.word = assemble_output(t.s3, dt, pl.lanes);
    }
  }

  Txn nt;
  nt.valid = slot.valid;
  if (slot.valid) {
    check_slot(slot);
    nt.serial = next_serial_++;
    nt.slot = slot;
    nt.s1 = stage1_map(slot, cfg_.datatypes[slot.dtype_select],
                       plans_[slot.dtype_select]);
    if (cfg_.evaluate_all_paths) {
      // Every mapping submodule decodes and packs the raw words each cycle;
      // the datatype select only picks which result proceeds.
      for (std::size_t i = 0; i < cfg_.datatypes.size(); ++i) {
        if (static_cast<int>(i) == slot.dtype_select) continue;
        Stage1Result shadow = stage1_map(slot, cfg_.datatypes[i], plans_[i]);
        (void)shadow;
      }
    }
  }
  inflight_.push_back(std::move(nt));

  trace_cycle();
  ++cycle_;
  return out;
}

void Pipeline::trace_cycle() const {
  if (!trace_) return;
  const int d0 = cfg_.stage_depths[0];
  const int d01 = d0 + cfg_.stage_depths[1];
  const int d012 = d01 + cfg_.stage_depths[2];

  std::array<std::string, 4> occ;
  for (const Txn& t : inflight_) {
    int s = t.age < d0 ? 0 : t.age < d01 ? 1 : t.age < d012 ? 2 : 3;
    std::string tag = t.valid ? "#" + std::to_string(t.serial) : "-";
    if (!occ[s].empty()) occ[s] += ',';
    occ[s] += tag;
  }
  for (auto& cell : occ)
    if (cell.empty()) cell = ".";

  *trace_ << "cycle " << cycle_ << " | map " << occ[0] << " | mul " << occ[1]
          << " | acc " << occ[2] << " | out " << occ[3];
  const Txn& newest = inflight_.back();
  if (newest.age == 0 && newest.valid)
    *trace_ << " | issue #" << newest.serial << ' '
            << cfg_.datatypes[newest.slot.dtype_select].id;
  *trace_ << '\n';
}

}  // namespace xtramac
