#pragma once

#include <vector>

#include "irsim/config_io.hpp"
#include "irsim/inference.hpp"

namespace irsim {

struct CalibrationOptions {
  int candidate_min = 0;
  int candidate_max = 64;  // clipped to the layer's bias-row budget
  double target_below_bound = 0.03;
};

struct LayerCalibration {
  int layer_index = -1;  // manifest layer index
  int bias_units = 0;
  bool met_target = false;
  bool warning = false;  // no candidate met the below-bound target
  double pre_below = 0, pre_flip = 0;    // rates without extra bias
  double post_below = 0, post_flip = 0;  // rates at the chosen bias
  uint64_t sa_calls = 0;
};

/// Pair-event rates of one manifest layer over a calibration set: the layer's
/// inputs are produced by running the network prefix with the current
/// manifest, then every (sample, pixel, channel) pair evaluation is counted.
struct PairRates {
  double below = 0, flip = 0;
  uint64_t calls = 0;
};

/// Pick the layerwise extra bias of every proposed-style layer: sweep integer
/// candidates, measure the below-lower-bound rate (the pair current
/// difference magnitude under the sensing window's lower bound) and the
/// margin-flip rate, and keep the candidate minimizing the larger of the two,
/// ties toward smaller |bias|. The chosen bias is written into the manifest
/// before the next layer is processed. Sets `warning` (and leaves the best
/// effort in place) when no candidate reaches the target below-bound rate.
std::vector<LayerCalibration> calibrate_extra_bias(const TernaryConvModel& model,
                                                   MappingManifest& manifest,
                                                   const Dataset& calibration,
                                                   const MacroEngine& engine,
                                                   const CalibrationOptions& options = {});

}  // namespace irsim
