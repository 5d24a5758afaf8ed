#include "irsim/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace irsim {

namespace {

// Inputs to the target IRC layer for every calibration sample, produced by
// the network prefix under the current manifest.
std::vector<BitTensor> collect_layer_inputs(const TernaryConvModel& model,
                                            const MappingManifest& manifest,
                                            const MacroEngine& engine, const Dataset& calib,
                                            int target_irc) {
  auto mapped = materialize_layers(model, manifest, engine.geometry());
  std::vector<BitTensor> out(calib.samples());
  for (int s = 0; s < calib.samples(); ++s) {
    BitTensor x(model.input_channels, model.input_h, model.input_w);
    const uint8_t* bits = calib.sample(s);
    std::copy(bits, bits + x.v.size(), x.v.begin());
    int irc = 0;
    for (const auto& spec : model.layers) {
      if (spec.kind == LayerKind::DigitalFirst) {
        x = digital_first_forward(x, spec);
      } else if (spec.kind == LayerKind::IrcGconv) {
        if (irc == target_irc) break;
        x = engine.gconv_forward(x, spec, mapped[irc], static_cast<uint64_t>(s),
                                 static_cast<uint64_t>(irc));
        ++irc;
      }
    }
    out[s] = std::move(x);
  }
  return out;
}

PairRates measure_rates(const TernaryConvModel& model, const MappingManifest& manifest,
                        int layer_index, int bias_units, const MacroEngine& engine,
                        const std::vector<BitTensor>& inputs) {
  MappingManifest probe = manifest;
  apply_extra_bias(probe, layer_index, bias_units);
  MappingManifest one;
  one.style = probe.style;
  one.rows = probe.rows;
  one.columns = probe.columns;
  one.layers.push_back(probe.layers[layer_index]);
  auto mapped = materialize_layers(model, one, engine.geometry());
  const LayerSpec& spec = model.layers[one.layers[0].model_layer_index];

  LayerEventStats stats;
  for (size_t s = 0; s < inputs.size(); ++s)
    engine.gconv_forward(inputs[s], spec, mapped[0], static_cast<uint64_t>(s),
                         static_cast<uint64_t>(layer_index), &stats);
  PairRates r;
  r.calls = stats.sa_calls;
  if (stats.sa_calls > 0) {
    r.below = static_cast<double>(stats.below_bound) / stats.sa_calls;
    r.flip = static_cast<double>(stats.margin_flips) / stats.sa_calls;
  }
  return r;
}

}  // namespace

std::vector<LayerCalibration> calibrate_extra_bias(const TernaryConvModel& model,
                                                   MappingManifest& manifest,
                                                   const Dataset& calibration,
                                                   const MacroEngine& engine,
                                                   const CalibrationOptions& options) {
  if (manifest.style != MappingStyle::ProposedNoBn)
    throw std::invalid_argument("calibrate_extra_bias: manifest must use the proposed style");
  if (calibration.samples() == 0)
    throw std::invalid_argument("calibrate_extra_bias: empty calibration set");
  if (options.candidate_min > options.candidate_max)
    throw std::invalid_argument("calibrate_extra_bias: empty candidate range");

  std::vector<LayerCalibration> results;
  for (int li = 0; li < static_cast<int>(manifest.layers.size()); ++li) {
    const auto& lm = manifest.layers[li];
    int budget = lm.channels.empty() ? 0 : lm.channels.front().bias_rows;
    for (const auto& ch : lm.channels) budget = std::min(budget, ch.bias_rows);

    const int lo = std::max(options.candidate_min, -budget);
    const int hi = std::min(options.candidate_max, budget);
    if (lo > hi) throw std::invalid_argument("calibrate_extra_bias: no feasible candidate");

    auto inputs = collect_layer_inputs(model, manifest, engine, calibration, li);

    // candidates in tie-break order: smaller |bias| first, positive before negative
    std::vector<int> candidates;
    for (int b = lo; b <= hi; ++b) candidates.push_back(b);
    std::sort(candidates.begin(), candidates.end(), [](int a, int b) {
      if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
      return a > b;
    });

    LayerCalibration cal;
    cal.layer_index = li;
    PairRates pre = measure_rates(model, manifest, li, 0, engine, inputs);
    cal.pre_below = pre.below;
    cal.pre_flip = pre.flip;
    cal.sa_calls = pre.calls;

    int best = 0;
    PairRates best_rates;
    double best_score = -1.0;
    bool best_meets = false;
    bool first = true;
    for (int b : candidates) {
      PairRates r = b == 0 ? pre : measure_rates(model, manifest, li, b, engine, inputs);
      double score = std::max(r.below, r.flip);
      bool meets = r.below <= options.target_below_bound;
      // a candidate meeting the below-bound target beats any that does not
      bool better = first || (meets && !best_meets) ||
                    (meets == best_meets && score < best_score);
      if (better) {
        best = b;
        best_rates = r;
        best_score = score;
        best_meets = meets;
        first = false;
      }
    }

    cal.bias_units = best;
    cal.post_below = best_rates.below;
    cal.post_flip = best_rates.flip;
    cal.met_target = best_meets;
    cal.warning = !best_meets;
    apply_extra_bias(manifest, li, best);
    results.push_back(cal);
  }
  return results;
}

}  // namespace irsim
