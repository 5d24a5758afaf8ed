#include "irsim/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace irsim {

namespace {
constexpr uint64_t kSaStreamTag = 0x73615f726e67ULL;  // sense-amplifier draws
}

AccumulationMode AccumulationMode::partial_sum(int k) {
  AccumulationMode m{Kind::PartialSum, k};
  m.validate();
  return m;
}

void AccumulationMode::validate() const {
  if (kind == Kind::PartialSum && k_subblocks < 2)
    throw std::invalid_argument("AccumulationMode: partial_sum needs k >= 2");
}

void LayerEventStats::add(const PairTrace& t) {
  sa_calls += 1;
  range_violations += t.events.range_violation;
  below_bound += t.events.below_bound;
  margin_flips += t.events.margin_flip;
  domain_clamps += t.domain_clamp;
  current_sum_units += t.i_plus + t.i_minus;
}

void LayerEventStats::merge(const LayerEventStats& o) {
  sa_calls += o.sa_calls;
  range_violations += o.range_violations;
  below_bound += o.below_bound;
  margin_flips += o.margin_flips;
  domain_clamps += o.domain_clamps;
  current_sum_units += o.current_sum_units;
}

MacroEngine::MacroEngine(const DeviceParams& dev, const MacroGeometry& geom,
                         const NonidealConfig& cfg, AccumulationMode mode, ExecutionPolicy policy)
    : dev_(dev), geom_(geom), cfg_(cfg), mode_(mode), policy_(policy), nonlin_(cfg) {
  dev_.validate();
  geom_.validate();
  cfg_.validate();
  mode_.validate();
  dev_.sigma_log_r = cfg_.sigma_log_r;
  if (cfg_.effects.device_variation && cfg_.sigma_log_r > 0.0)
    mask_ = std::make_unique<VariationMask>(geom_, cfg_.sigma_log_r, cfg_.seed);
}

MacroEngine::ColumnEval MacroEngine::eval_column(std::span<const uint8_t> patch,
                                                 const ColumnCells& cells, int row_begin,
                                                 int row_end) const {
  ColumnEval out;
  const double v_drive = dev_.v_cell;
  const double i_unit = dev_.i_unit_amperes();
  const double g_lrs = 1.0 / dev_.r_lrs_nominal;
  const double g_hrs = dev_.hrs_leakage ? 1.0 / dev_.r_hrs_nominal : 0.0;
  const bool with_mask = mask_ != nullptr;

  if (cfg_.effects.ir_drop && cfg_.wire.r_segment > 0.0) {
    // Block bins only over the touched span; the reduced ladder sees their
    // global position through the block index.
    const int bs = cfg_.wire.block_size;
    const int nblocks = (row_end + bs - 1) / bs;
    std::vector<double> bins(nblocks, 0.0);
    for (size_t i = 0; i < cells.rows.size(); ++i) {
      const int row = cells.rows[i];
      if (row < row_begin || row >= row_end) continue;
      const int pi = cells.patch_index[i];
      if (pi >= 0 && !patch[pi]) continue;
      const double base = cells.is_lrs[i] ? g_lrs : g_hrs;
      if (base == 0.0) continue;
      const double m = with_mask ? mask_->multiplier(row, cells.col) : 1.0;
      bins[row / bs] += base * m;
      out.p += cells.is_lrs[i];
    }
    auto v = block_ladder_voltages(bins, bs * cfg_.wire.r_segment, v_drive);
    double amps = 0.0;
    for (int b = 0; b < nblocks; ++b) amps += bins[b] * (v_drive - v[b]);
    out.current = amps / i_unit;
  } else {
    double units = 0.0;
    for (size_t i = 0; i < cells.rows.size(); ++i) {
      const int row = cells.rows[i];
      if (row < row_begin || row >= row_end) continue;
      const int pi = cells.patch_index[i];
      if (pi >= 0 && !patch[pi]) continue;
      const double base = cells.is_lrs[i] ? 1.0 : dev_.hrs_leak_units();
      if (base == 0.0) continue;
      const double m = with_mask ? mask_->multiplier(row, cells.col) : 1.0;
      units += base * m;
      out.p += cells.is_lrs[i];
    }
    out.current = units;
  }

  if (cfg_.effects.nonlinearity) {
    int p = out.p;
    if (p > nonlin_.domain_max()) {
      // The fit is extrapolation past the domain edge: evaluate there and flag.
      p = nonlin_.domain_max();
      out.domain_clamp = true;
    }
    out.current *= nonlin_.ratio(p);
  }
  return out;
}

PairTrace MacroEngine::simulate_pair(std::span<const uint8_t> patch, const MappedChannel& ch,
                                     RngStream sa_stream) const {
  PairTrace t;
  if (mode_.kind == AccumulationMode::Kind::SingleShot) {
    auto plus = eval_column(patch, ch.plus, 0, ch.used_row_end);
    auto minus = eval_column(patch, ch.minus, 0, ch.used_row_end);
    t.p_plus = plus.p;
    t.p_minus = minus.p;
    t.i_plus = plus.current;
    t.i_minus = minus.current;
    t.domain_clamp = plus.domain_clamp || minus.domain_clamp;
  } else {
    // k sequential sub-convolutions over contiguous row ranges of the used
    // region; an ideal external accumulator adds the currents, then one
    // final comparison happens.
    const int k = mode_.k_subblocks;
    const int span = ch.used_row_end;
    for (int g = 0; g < k; ++g) {
      const int lo = static_cast<int>(static_cast<int64_t>(span) * g / k);
      const int hi = static_cast<int>(static_cast<int64_t>(span) * (g + 1) / k);
      auto plus = eval_column(patch, ch.plus, lo, hi);
      auto minus = eval_column(patch, ch.minus, lo, hi);
      t.p_plus += plus.p;
      t.p_minus += minus.p;
      t.i_plus += plus.current;
      t.i_minus += minus.current;
      t.domain_clamp = t.domain_clamp || plus.domain_clamp || minus.domain_clamp;
    }
  }

  SaResult r = sa_compare(t.i_plus, t.i_minus, static_cast<double>(t.p_plus + t.p_minus), cfg_,
                          sa_stream);
  t.bit = r.bit;
  t.events = r.events;
  return t;
}

std::vector<MappedLayer> materialize_layers(const TernaryConvModel& model,
                                            const MappingManifest& manifest,
                                            const MacroGeometry& geometry) {
  std::vector<MappedLayer> out;
  for (const auto& lm : manifest.layers) {
    const LayerSpec& spec = model.layers.at(lm.model_layer_index);
    if (spec.kind != LayerKind::IrcGconv)
      throw std::invalid_argument("materialize_layers: manifest points at a digital layer");
    if (spec.out_channels != static_cast<int>(lm.channels.size()))
      throw std::invalid_argument("materialize_layers: channel count mismatch");

    MappedLayer ml;
    ml.model_layer_index = lm.model_layer_index;
    const int wpc = spec.weights_per_channel();
    for (int c = 0; c < spec.out_channels; ++c) {
      const ChannelPlacement& pl = lm.channels[c];
      if (pl.conv_rows != wpc)
        throw std::invalid_argument("materialize_layers: conv row count mismatch");
      std::span<const int8_t> w(spec.weights.data() + static_cast<size_t>(c) * wpc, wpc);
      PatternPair conv = manifest.style == MappingStyle::BaselineBn ? map_binary_baseline(w)
                                                                    : map_ternary(w);
      PatternPair bias = map_bias_rows(pl.bias_units, pl.bias_rows);

      MappedChannel mc;
      mc.plus.col = 2 * pl.pair_index;
      mc.minus.col = 2 * pl.pair_index + 1;
      auto push = [](ColumnCells& cc, int row, CellState s, int patch_idx) {
        cc.rows.push_back(row);
        cc.is_lrs.push_back(s == CellState::LRS);
        cc.patch_index.push_back(patch_idx);
      };
      for (int i = 0; i < wpc; ++i) {
        push(mc.plus, pl.conv_row_begin + i, conv.plus[i], i);
        push(mc.minus, pl.conv_row_begin + i, conv.minus[i], i);
      }
      for (int i = 0; i < pl.bias_rows; ++i) {
        push(mc.plus, pl.bias_row_begin + i, bias.plus[i], -1);
        push(mc.minus, pl.bias_row_begin + i, bias.minus[i], -1);
      }
      mc.used_row_end = std::max(pl.conv_row_begin + pl.conv_rows, pl.bias_row_begin + pl.bias_rows);
      if (mc.used_row_end > geometry.rows)
        throw std::invalid_argument("materialize_layers: placement exceeds array rows");
      if (pl.flipped) std::swap(mc.plus, mc.minus);
      ml.channels.push_back(std::move(mc));
    }
    out.push_back(std::move(ml));
  }
  return out;
}

namespace {

// im2col patch of one group at one output pixel; layout [group_ch][ky][kx].
void extract_patch(const BitTensor& in, int group_base, int group_channels, int kernel, int stride,
                   int padding, int oy, int ox, uint8_t* patch) {
  int idx = 0;
  for (int ci = 0; ci < group_channels; ++ci) {
    const int ch = group_base + ci;
    for (int ky = 0; ky < kernel; ++ky) {
      const int y = oy * stride - padding + ky;
      for (int kx = 0; kx < kernel; ++kx, ++idx) {
        const int x = ox * stride - padding + kx;
        patch[idx] = (y >= 0 && y < in.h && x >= 0 && x < in.w) ? in.at(ch, y, x) : 0;
      }
    }
  }
}

}  // namespace

BitTensor MacroEngine::gconv_forward(const BitTensor& in, const LayerSpec& spec,
                                     const MappedLayer& mapped, uint64_t sample_tag,
                                     uint64_t layer_tag, LayerEventStats* stats) const {
  if (in.c != spec.in_channels)
    throw std::invalid_argument("gconv_forward: input channel mismatch in layer '" + spec.name + "'");
  int oh, ow;
  spec.out_shape(in.h, in.w, oh, ow);
  const int pixels = oh * ow;
  const int wpc = spec.weights_per_channel();
  const int groups = spec.groups();
  const int out_per_group = spec.out_channels / groups;

  // im2col once per (group, pixel); channels of a group share the patch
  std::vector<uint8_t> patches(static_cast<size_t>(groups) * pixels * wpc);
  for (int g = 0; g < groups; ++g)
    for (int p = 0; p < pixels; ++p)
      extract_patch(in, g * spec.group_channels, spec.group_channels, spec.kernel, spec.stride,
                    spec.padding, p / ow, p % ow, &patches[(static_cast<size_t>(g) * pixels + p) * wpc]);

  BitTensor out(spec.out_channels, oh, ow);
  std::vector<LayerEventStats> slot_stats(stats ? pixels : 0);

  RngStream layer_stream = RngStream(cfg_.seed).child(kSaStreamTag).child(sample_tag).child(layer_tag);

  const int total = pixels * spec.out_channels;
  const bool parallel = policy_ == ExecutionPolicy::Parallel;
#pragma omp parallel for schedule(static) if (parallel)
  for (int job = 0; job < total; ++job) {
    const int p = job / spec.out_channels;
    const int ch = job % spec.out_channels;
    const int g = ch / out_per_group;
    const uint8_t* patch = &patches[(static_cast<size_t>(g) * pixels + p) * wpc];
    RngStream stream = layer_stream.child(static_cast<uint64_t>(ch)).child(static_cast<uint64_t>(p));
    PairTrace t = simulate_pair({patch, static_cast<size_t>(wpc)}, mapped.channels[ch], stream);
    out.v[(static_cast<size_t>(ch) * oh + p / ow) * ow + p % ow] = static_cast<uint8_t>(t.bit);
    if (stats) slot_stats[p].add(t);
  }

  if (stats)
    for (const auto& s : slot_stats) stats->merge(s);
  return out;
}

BitTensor digital_first_forward(const BitTensor& in, const LayerSpec& spec) {
  if (in.c != spec.in_channels)
    throw std::invalid_argument("digital_first_forward: input channel mismatch");
  int oh, ow;
  spec.out_shape(in.h, in.w, oh, ow);
  const int wpc = spec.weights_per_channel();
  const int groups = spec.groups();
  const int out_per_group = spec.out_channels / groups;

  BitTensor out(spec.out_channels, oh, ow);
  std::vector<uint8_t> patch(wpc);
  for (int ch = 0; ch < spec.out_channels; ++ch) {
    const int g = ch / out_per_group;
    const int8_t* w = spec.weights.data() + static_cast<size_t>(ch) * wpc;
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        extract_patch(in, g * spec.group_channels, spec.group_channels, spec.kernel, spec.stride,
                      spec.padding, oy, ox, patch.data());
        long sum = 0;
        for (int i = 0; i < wpc; ++i) sum += static_cast<long>(w[i]) * patch[i];
        out.set(ch, oy, ox, sum > spec.thresholds[ch] ? 1 : 0);
      }
  }
  return out;
}

std::vector<double> digital_last_scores(const BitTensor& in, const LayerSpec& spec, int classes) {
  const int features = in.c * in.h * in.w;
  if (static_cast<int>(spec.weights.size()) != classes * features)
    throw std::invalid_argument("digital_last_scores: weight size mismatch");
  std::vector<double> scores(classes, 0.0);
  for (int c = 0; c < classes; ++c) {
    const int8_t* w = spec.weights.data() + static_cast<size_t>(c) * features;
    long s = 0;
    for (int i = 0; i < features; ++i) s += static_cast<long>(w[i]) * in.v[i];
    scores[c] = static_cast<double>(s);
  }
  return scores;
}

int argmax_class(std::span<const double> scores) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

ForwardResult MacroEngine::forward(const TernaryConvModel& model, const MappingManifest& manifest,
                                   const MappedLayer* mapped_layers, const uint8_t* input_bits,
                                   uint64_t sample_tag) const {
  BitTensor x(model.input_channels, model.input_h, model.input_w);
  std::copy(input_bits, input_bits + x.v.size(), x.v.begin());

  ForwardResult res;
  res.layer_stats.resize(manifest.layers.size());

  size_t irc_index = 0;
  for (const auto& spec : model.layers) {
    switch (spec.kind) {
      case LayerKind::DigitalFirst:
        x = digital_first_forward(x, spec);
        break;
      case LayerKind::IrcGconv: {
        if (irc_index >= manifest.layers.size())
          throw std::invalid_argument("forward: manifest has too few layers");
        x = gconv_forward(x, spec, mapped_layers[irc_index], sample_tag,
                          static_cast<uint64_t>(irc_index), &res.layer_stats[irc_index]);
        ++irc_index;
        break;
      }
      case LayerKind::DigitalLast:
        res.scores = digital_last_scores(x, spec, model.classes);
        break;
    }
  }
  res.predicted = argmax_class(res.scores);
  for (const auto& s : res.layer_stats) res.power_units += s.current_sum_units;
  return res;
}

double power_proxy(double total_current_units, double voltage,
                   std::span<const WlVoltagePoint> voltage_table) {
  for (const auto& p : voltage_table)
    if (p.voltage == voltage) return total_current_units * p.current_scale;
  throw std::invalid_argument("power_proxy: voltage not in the configured table");
}

}  // namespace irsim
