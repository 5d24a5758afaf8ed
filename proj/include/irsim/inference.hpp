#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "irsim/core.hpp"
#include "irsim/irdrop.hpp"
#include "irsim/mapper.hpp"
#include "irsim/model.hpp"
#include "irsim/nonideal.hpp"

namespace irsim {

/// How one channel's convolution is accumulated on the bit-line pair:
/// everything in one operation, or in k sequential sub-block operations whose
/// currents are added by an ideal external accumulator before the single
/// final comparison.
struct AccumulationMode {
  enum class Kind { SingleShot, PartialSum };
  Kind kind = Kind::SingleShot;
  int k_subblocks = 3;

  static AccumulationMode single_shot() { return {Kind::SingleShot, 1}; }
  static AccumulationMode partial_sum(int k);
  void validate() const;
};

enum class ExecutionPolicy { Serial, Parallel };

/// Binary feature map, [channel][y][x], one byte per bit.
struct BitTensor {
  int c = 0, h = 0, w = 0;
  std::vector<uint8_t> v;

  BitTensor() = default;
  BitTensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, 0) {}
  uint8_t at(int ch, int y, int x) const { return v[(static_cast<size_t>(ch) * h + y) * w + x]; }
  void set(int ch, int y, int x, uint8_t bit) { v[(static_cast<size_t>(ch) * h + y) * w + x] = bit; }
};

/// One bit-line's used cells, materialized from a manifest placement.
/// patch_index >= 0 ties a conv cell to its position in the im2col patch;
/// bias cells use -1 and see a fixed input of 1.
struct ColumnCells {
  int col = 0;
  std::vector<int32_t> rows;
  std::vector<uint8_t> is_lrs;
  std::vector<int32_t> patch_index;
};

struct MappedChannel {
  ColumnCells plus, minus;
  int used_row_end = 0;  // extent of conv+bias rows, for partial-sum grouping
};

struct MappedLayer {
  int model_layer_index = 0;
  std::vector<MappedChannel> channels;
};

/// Per-pair simulation outcome.
struct PairTrace {
  int bit = 0;
  int p_plus = 0, p_minus = 0;     // activated LRS counts including bias cells
  double i_plus = 0, i_minus = 0;  // currents entering the sense amplifier, units
  SaEvents events;
  bool domain_clamp = false;  // an activated-LRS count left the nonlinearity fit domain
};

struct LayerEventStats {
  uint64_t sa_calls = 0;
  uint64_t range_violations = 0;
  uint64_t below_bound = 0;
  uint64_t margin_flips = 0;
  uint64_t domain_clamps = 0;
  double current_sum_units = 0.0;  // summed final bit-line currents (power proxy input)

  void add(const PairTrace& t);
  void merge(const LayerEventStats& o);
};

struct ForwardResult {
  std::vector<double> scores;
  int predicted = -1;
  std::vector<LayerEventStats> layer_stats;  // one per IRC layer, manifest order
  double power_units = 0.0;
};

/// Simulated macro: owns the variation mask and the nonlinearity table for
/// one (config, seed) pair. All evaluation methods are const and safe to call
/// from concurrent workers; randomness comes from streams derived per work
/// item, so results do not depend on scheduling.
class MacroEngine {
 public:
  MacroEngine(const DeviceParams& dev, const MacroGeometry& geom, const NonidealConfig& cfg,
              AccumulationMode mode, ExecutionPolicy policy = ExecutionPolicy::Parallel);

  const NonidealConfig& config() const { return cfg_; }
  const MacroGeometry& geometry() const { return geom_; }
  const DeviceParams& device() const { return dev_; }
  AccumulationMode mode() const { return mode_; }
  ExecutionPolicy policy() const { return policy_; }
  void set_policy(ExecutionPolicy p) { policy_ = p; }
  void set_mode(AccumulationMode m) { m.validate(); mode_ = m; }
  const VariationMask* mask() const { return mask_ ? mask_.get() : nullptr; }

  /// Evaluate one mapped channel on one input patch (conv-row bit vector).
  PairTrace simulate_pair(std::span<const uint8_t> patch, const MappedChannel& ch,
                          RngStream sa_stream) const;

  /// One grouped-convolution layer through the macro.
  BitTensor gconv_forward(const BitTensor& in, const LayerSpec& spec, const MappedLayer& mapped,
                          uint64_t sample_tag, uint64_t layer_tag,
                          LayerEventStats* stats = nullptr) const;

  /// Full network pass: exact digital ends, IRC layers through the macro.
  ForwardResult forward(const TernaryConvModel& model, const MappingManifest& manifest,
                        const MappedLayer* mapped_layers, const uint8_t* input_bits,
                        uint64_t sample_tag) const;

 private:
  DeviceParams dev_;
  MacroGeometry geom_;
  NonidealConfig cfg_;
  AccumulationMode mode_;
  ExecutionPolicy policy_;
  NonlinearityModel nonlin_;
  std::unique_ptr<VariationMask> mask_;

  struct ColumnEval {
    int p = 0;
    double current = 0.0;
    bool domain_clamp = false;
  };
  ColumnEval eval_column(std::span<const uint8_t> patch, const ColumnCells& cells, int row_begin,
                         int row_end) const;
};

/// Materialize the manifest placements into full column contents.
std::vector<MappedLayer> materialize_layers(const TernaryConvModel& model,
                                            const MappingManifest& manifest,
                                            const MacroGeometry& geometry);

/// Digital layers in exact integer arithmetic.
BitTensor digital_first_forward(const BitTensor& in, const LayerSpec& spec);
std::vector<double> digital_last_scores(const BitTensor& in, const LayerSpec& spec, int classes);
int argmax_class(std::span<const double> scores);  // ties -> lowest index

/// Relative power proxy: summed bit-line current times the current scale of
/// the word-line voltage (scale 1.0 at the 0.44 V anchor point). Throws on a
/// voltage missing from the table.
double power_proxy(double total_current_units, double voltage,
                   std::span<const WlVoltagePoint> voltage_table);

}  // namespace irsim
