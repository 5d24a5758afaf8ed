#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "irsim/core.hpp"
#include "irsim/rng.hpp"

namespace irsim {

/// Per-effect on/off switches. With everything off the pipeline reduces to
/// exact integer arithmetic.
struct EffectSwitches {
  bool device_variation = true;
  bool nonlinearity = true;
  bool ir_drop = true;
  bool sa_window = true;  // limited sensing range -> random output
  bool sa_offset = true;  // amplifier sensing variation

  bool any() const {
    return device_variation || nonlinearity || ir_drop || sa_window || sa_offset;
  }
};

/// One point of the required-margin curve: at p_total activated LRS cells the
/// amplifier needs |i_pos - i_neg| >= margin units for a guaranteed decision.
struct SaMarginPoint {
  double p_total = 0.0;
  double margin = 0.0;
};

/// Word-line operating point: measured device spread and relative current
/// scale at a given voltage. The 0.44 V anchor has scale 1.0 by convention.
struct WlVoltagePoint {
  double voltage = 0.44;
  double sigma_log_r = 0.4245;
  double current_scale = 1.0;
};

/// Bit-line wire model. r_segment is the resistance of one cell-to-cell
/// bit-line segment; row 0 is nearest the driver. r_segment = 0 reproduces
/// the ideal (no IR drop) model exactly.
struct WireModel {
  double r_segment = 0.18;  // ohm; calibrated so 160 LRS cells in the first
                            // five blocks lose about 2% of their ideal current
  int block_size = 32;

  void validate() const;
};

/// All nonideal-effect parameters. Serialized to/from the key-value config
/// file together with DeviceParams and MacroGeometry (see config_io.hpp);
/// the seed is mandatory in serialized form.
struct NonidealConfig {
  double sigma_log_r = 0.4245;

  // Accumulation nonlinearity: two quartic fits in the activated LRS count,
  // coefficients in descending powers (p^4 ... p^0).
  std::array<double, 5> nonlin_poly_low = {1.0286e-8, -3.79e-6, 5.3e-4, -3.92e-2, 2.5};
  std::array<double, 5> nonlin_poly_high = {1.8063e-11, -3.204e-8, 2.2495e-5, -8.057e-3, 1.707};
  int nonlin_breakpoint = 140;
  int nonlin_domain_max = 320;
  // The two fitted branches disagree by ~1.3% at the breakpoint, which would
  // leave p*ratio(p) locally non-monotone across the seam. When set, values
  // in that window are floored so the transfer stays strictly increasing;
  // everything outside the seam window is the fit evaluated as written.
  bool nonlin_bridge_seam = true;

  std::vector<SaMarginPoint> sa_margin_curve = {{0, 1}, {200, 2}, {400, 3}, {1024, 5}};
  double sa_margin_extra = 0.0;  // units added on top of the curve

  double i_min_sense = 35.0;  // sensing window, units
  double i_max = 300.0;

  WireModel wire;
  EffectSwitches effects;
  uint64_t seed = 1;

  void validate() const;
};

/// Per-cell current multipliers drawn from the measured log-normal resistance
/// distribution. Resistance is log-normal with median at nominal, so the
/// current multiplier is exp(-X), X ~ Normal(0, sigma^2). Deterministic given
/// (seed, sigma): multiplier(r, c) depends only on those plus the address.
class VariationMask {
 public:
  VariationMask(const MacroGeometry& geometry, double sigma_log_r, uint64_t seed);

  double multiplier(int row, int col) const { return m_[static_cast<size_t>(col) * rows_ + row]; }
  std::span<const double> column(int col) const {
    return {m_.data() + static_cast<size_t>(col) * rows_, static_cast<size_t>(rows_)};
  }

  int rows() const { return rows_; }
  int columns() const { return cols_; }
  double sigma() const { return sigma_; }
  uint64_t seed() const { return seed_; }

 private:
  int rows_, cols_;
  double sigma_;
  uint64_t seed_;
  std::vector<double> m_;  // column-major
};

/// Single multiplier without materializing a mask; the mask stores exactly
/// these values.
double variation_multiplier(uint64_t seed, double sigma_log_r, int row, int col);

VariationMask sample_variation_mask(const MacroGeometry& geometry, double sigma_log_r,
                                    uint64_t seed);

/// Accumulation nonlinearity evaluated on the integer LRS count domain.
/// Construction precomputes the transfer table f(p) = p * ratio(p) and, when
/// bridging is enabled, floors the seam window so f is strictly increasing.
class NonlinearityModel {
 public:
  NonlinearityModel(const std::array<double, 5>& poly_low, const std::array<double, 5>& poly_high,
                    int breakpoint, int domain_max, bool bridge_seam);
  explicit NonlinearityModel(const NonidealConfig& cfg)
      : NonlinearityModel(cfg.nonlin_poly_low, cfg.nonlin_poly_high, cfg.nonlin_breakpoint,
                          cfg.nonlin_domain_max, cfg.nonlin_bridge_seam) {}

  /// Ratio at p activated LRS cells. Throws std::domain_error outside
  /// [0, domain_max]; the fit came from circuits limited to ~300 uA and is
  /// extrapolation beyond that.
  double ratio(int p) const;

  /// p * ratio(p); strictly increasing on [1, domain_max] when bridged.
  double transfer(int p) const;

  int domain_max() const { return domain_max_; }

 private:
  int breakpoint_, domain_max_;
  std::vector<double> f_;       // transfer table, f_[p] for p in [0, domain_max]
  std::vector<double> ratio0_;  // literal branch value at p = 0 (for ratio(0))
};

/// ratio(p) honoring the effect switch: 1.0 when nonlinearity is disabled.
double nonlinearity_ratio(int p, const NonidealConfig& cfg);

/// ideal_current * ratio(p), same domain rules as nonlinearity_ratio.
double apply_nonlinearity(double ideal_current, int p, const NonidealConfig& cfg);

/// Required margin (units) at p_total activated LRS cells: piecewise-linear
/// interpolation of the configured curve plus sa_margin_extra.
double sa_required_margin(double p_total, const NonidealConfig& cfg);

/// Signed offset drawn uniformly on [-m, +m] where m = curve(p_total) + extra.
double sample_sa_offset(double p_total, const NonidealConfig& cfg, RngStream& stream);

struct SaEvents {
  bool range_violation = false;  // a bit-line current left the sensing window
  bool below_bound = false;      // |i_pos - i_neg| under the window lower bound
  bool margin_flip = false;      // the offset changed the comparison sign
};

struct SaResult {
  int bit = 0;
  SaEvents events;
};

/// Binary sense-amplifier decision on a bit-line pair.
///
/// If either current lies outside [i_min_sense, i_max] (and the window effect
/// is on), the output is an unbiased random bit and range_violation is
/// recorded. Otherwise the decision is i_pos - i_neg + offset > 0, recording
/// margin_flip when the offset changed the sign. below_bound flags pairs
/// whose current difference magnitude is under the window lower bound; it is
/// a detection-risk metric and does not alter the output.
SaResult sa_compare(double i_pos, double i_neg, double p_total, const NonidealConfig& cfg,
                    RngStream& stream);

}  // namespace irsim
