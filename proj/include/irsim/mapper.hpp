#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "irsim/core.hpp"

namespace irsim {

struct TernaryConvModel;

/// Row-aligned cell states for a (G+, G-) bit-line pair.
struct PatternPair {
  std::vector<CellState> plus;
  std::vector<CellState> minus;
};

/// Ternary mapping: +1 -> (LRS, HRS), -1 -> (HRS, LRS), 0 -> (HRS, HRS).
/// Throws std::invalid_argument on out-of-alphabet weights.
PatternPair map_ternary(std::span<const int8_t> weights);

/// Inverse of map_ternary. (LRS, LRS) rows are not a weight encoding.
std::vector<int8_t> decode_ternary(const PatternPair& pair);

/// Baseline binary mapping: +1 -> LRS, -1 -> HRS on the convolution column
/// (plus); the reference column (minus) gets alternating LRS/HRS starting
/// with LRS at its first row, so odd lengths round the LRS count down.
PatternPair map_binary_baseline(std::span<const int8_t> weights);

/// Per-channel batch-normalization parameters.
struct BnParams {
  double gamma = 1.0;
  double beta = 0.0;
  double mean = 0.0;
  double var = 1.0;
  double eps = 1e-5;
};

struct BnFold {
  double theta = 0.0;  // sign(gamma*(x-mean)/sqrt(var+eps)+beta) == sign(x-theta) xor flip
  bool flip = false;
};

/// Fold BN into a comparison threshold: theta = mean - beta*sqrt(var+eps)/gamma,
/// flip = (gamma < 0). Throws on gamma == 0 or var < 0.
BnFold fold_bn_to_threshold(const BnParams& bn);

struct QuantizedBias {
  int units = 0;
  double residual = 0.0;  // value - units
};

/// Round to the nearest integer current unit, ties toward zero.
QuantizedBias quantize_bias_units(double value);

/// Bias-row cell states for a signed bias driven by fixed-1 inputs: positive
/// bias puts |bias| LRS rows on G+, negative on G-, remaining rows (HRS, HRS).
/// Throws when |bias_units| > n_bias_rows.
PatternPair map_bias_rows(int bias_units, int n_bias_rows);

struct DistributionReport {
  double frac_neg = 0.0;
  double frac_zero = 0.0;
  double frac_pos = 0.0;
  double lrs_fraction = 0.0;  // implied over the G+/G- pair
  bool pass = false;
};

/// Fractions of -1/0/+1 against the 20/60/20 target, each within the given
/// tolerance (fractions, default five percentage points).
DistributionReport check_weight_distribution(std::span<const int8_t> weights,
                                             double tolerance = 0.05);

enum class MappingStyle { BaselineBn, ProposedNoBn };

/// Bias-row budget scaled from the reference channel shape (540 conv rows
/// carry 96 in-memory BN rows in the baseline layout and 32 extra-bias rows
/// in the proposed one).
int bias_rows_for(MappingStyle style, int conv_rows);

struct ChannelPlacement {
  int pair_index = 0;  // G+ column = 2*pair_index, G- column = 2*pair_index + 1
  int conv_row_begin = 0;
  int conv_rows = 0;
  int bias_row_begin = 0;
  int bias_rows = 0;
  int bias_units = 0;   // signed; folded BN bias (baseline) or extra bias (proposed)
  bool flipped = false; // negative BN gamma: comparison polarity swapped
};

struct LayerMapping {
  std::string name;
  int model_layer_index = 0;
  int kernel = 3, stride = 1, padding = 0;
  int group_channels = 0, out_channels = 0;
  int extra_bias_units = 0;  // layerwise value mirrored in channel bias (proposed)
  std::vector<ChannelPlacement> channels;
};

struct MappingManifest {
  MappingStyle style = MappingStyle::ProposedNoBn;
  int rows = 1024;
  int columns = 1024;
  std::vector<LayerMapping> layers;

  std::string serialize() const;
  static MappingManifest parse(const std::string& text);
};

/// Lower every IRC layer of the model onto column pairs. Baseline style maps
/// binary weights with in-memory BN rows nearest the driver; proposed style
/// maps ternary weights with conv rows nearest the driver and a small
/// extra-bias region behind them. Throws when a channel does not fit the
/// array, when BN parameters are missing in baseline style, or when a
/// proposed layer fails the weight-distribution gate.
MappingManifest build_manifest(const TernaryConvModel& model, const MacroGeometry& geometry,
                               MappingStyle style, double distribution_tolerance = 0.05);

/// Set the layerwise extra bias of a proposed-style manifest layer.
void apply_extra_bias(MappingManifest& manifest, int layer_index, int bias_units);

}  // namespace irsim
