#include "irsim/nonideal.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace irsim {

namespace {

constexpr uint64_t kMaskTag = 0x6d61736bULL;  // per-cell variation draws

double horner(const std::array<double, 5>& c, double p) {
  double r = 0.0;
  for (double a : c) r = r * p + a;
  return r;
}

// Minimal strict step used to floor the seam window of the transfer table.
// Far below every decision scale in the model (margins are >= 1 unit).
constexpr double kSeamStep = 1e-9;

}  // namespace

void WireModel::validate() const {
  if (r_segment < 0) throw std::invalid_argument("WireModel: r_segment must be >= 0");
  if (block_size <= 0) throw std::invalid_argument("WireModel: block_size must be positive");
}

void NonidealConfig::validate() const {
  if (sigma_log_r < 0) throw std::invalid_argument("NonidealConfig: sigma_log_r must be >= 0");
  if (nonlin_breakpoint >= nonlin_domain_max)
    throw std::invalid_argument("NonidealConfig: nonlin_breakpoint must be < nonlin_domain_max");
  if (nonlin_domain_max < 1)
    throw std::invalid_argument("NonidealConfig: nonlin_domain_max must be >= 1");
  if (!(0 < i_min_sense && i_min_sense < i_max))
    throw std::invalid_argument("NonidealConfig: need 0 < i_min_sense < i_max");
  if (sa_margin_curve.empty())
    throw std::invalid_argument("NonidealConfig: sa_margin_curve must not be empty");
  for (size_t i = 0; i < sa_margin_curve.size(); ++i) {
    if (sa_margin_curve[i].margin < 0)
      throw std::invalid_argument("NonidealConfig: margins must be >= 0");
    if (i > 0) {
      if (sa_margin_curve[i].p_total <= sa_margin_curve[i - 1].p_total)
        throw std::invalid_argument("NonidealConfig: sa_margin_curve p_total must increase");
      if (sa_margin_curve[i].margin < sa_margin_curve[i - 1].margin)
        throw std::invalid_argument("NonidealConfig: sa_margin_curve must be non-decreasing");
    }
  }
  if (sa_margin_extra < 0)
    throw std::invalid_argument("NonidealConfig: sa_margin_extra must be >= 0");
  wire.validate();
}

double variation_multiplier(uint64_t seed, double sigma_log_r, int row, int col) {
  if (sigma_log_r == 0.0) return 1.0;
  double z = keyed_normal(seed, kMaskTag, static_cast<uint64_t>(col), static_cast<uint64_t>(row));
  return std::exp(-sigma_log_r * z);
}

VariationMask::VariationMask(const MacroGeometry& geometry, double sigma_log_r, uint64_t seed)
    : rows_(geometry.rows), cols_(geometry.columns), sigma_(sigma_log_r), seed_(seed),
      m_(static_cast<size_t>(geometry.rows) * geometry.columns) {
  if (sigma_log_r < 0) throw std::invalid_argument("VariationMask: sigma must be >= 0");
#pragma omp parallel for schedule(static)
  for (int c = 0; c < cols_; ++c) {
    double* col = m_.data() + static_cast<size_t>(c) * rows_;
    for (int r = 0; r < rows_; ++r) col[r] = variation_multiplier(seed, sigma_log_r, r, c);
  }
}

VariationMask sample_variation_mask(const MacroGeometry& geometry, double sigma_log_r,
                                    uint64_t seed) {
  return VariationMask(geometry, sigma_log_r, seed);
}

NonlinearityModel::NonlinearityModel(const std::array<double, 5>& poly_low,
                                     const std::array<double, 5>& poly_high, int breakpoint,
                                     int domain_max, bool bridge_seam)
    : breakpoint_(breakpoint), domain_max_(domain_max) {
  if (breakpoint_ >= domain_max_ || domain_max_ < 1)
    throw std::invalid_argument("NonlinearityModel: bad breakpoint/domain");
  f_.resize(domain_max_ + 1);
  ratio0_.push_back(horner(poly_low, 0.0));
  f_[0] = 0.0;
  for (int p = 1; p <= domain_max_; ++p) {
    const auto& poly = p <= breakpoint_ ? poly_low : poly_high;
    f_[p] = p * horner(poly, static_cast<double>(p));
    if (bridge_seam && f_[p] <= f_[p - 1]) f_[p] = f_[p - 1] + kSeamStep;
  }
}

double NonlinearityModel::ratio(int p) const {
  if (p < 0 || p > domain_max_)
    throw std::domain_error("nonlinearity ratio queried at p=" + std::to_string(p) +
                            ", outside the fitted domain [0, " + std::to_string(domain_max_) + "]");
  if (p == 0) return ratio0_[0];
  return f_[p] / p;
}

double NonlinearityModel::transfer(int p) const {
  if (p < 0 || p > domain_max_) throw std::domain_error("nonlinearity transfer out of domain");
  return f_[p];
}

double nonlinearity_ratio(int p, const NonidealConfig& cfg) {
  if (!cfg.effects.nonlinearity) {
    if (p < 0 || p > cfg.nonlin_domain_max)
      throw std::domain_error("nonlinearity ratio out of domain");
    return 1.0;
  }
  NonlinearityModel model(cfg);
  return model.ratio(p);
}

double apply_nonlinearity(double ideal_current, int p, const NonidealConfig& cfg) {
  return ideal_current * nonlinearity_ratio(p, cfg);
}

double sa_required_margin(double p_total, const NonidealConfig& cfg) {
  const auto& curve = cfg.sa_margin_curve;
  double m;
  if (p_total <= curve.front().p_total) {
    m = curve.front().margin;
  } else if (p_total >= curve.back().p_total) {
    m = curve.back().margin;
  } else {
    m = curve.back().margin;
    for (size_t i = 1; i < curve.size(); ++i) {
      if (p_total <= curve[i].p_total) {
        double t = (p_total - curve[i - 1].p_total) / (curve[i].p_total - curve[i - 1].p_total);
        m = curve[i - 1].margin + t * (curve[i].margin - curve[i - 1].margin);
        break;
      }
    }
  }
  return m + cfg.sa_margin_extra;
}

double sample_sa_offset(double p_total, const NonidealConfig& cfg, RngStream& stream) {
  if (p_total < 0) throw std::invalid_argument("sample_sa_offset: p_total must be >= 0");
  double m = sa_required_margin(p_total, cfg);
  return m * stream.next_symmetric();
}

SaResult sa_compare(double i_pos, double i_neg, double p_total, const NonidealConfig& cfg,
                    RngStream& stream) {
  if (i_pos < 0 || i_neg < 0)
    throw std::invalid_argument("sa_compare: currents must be >= 0");
  SaResult r;
  double diff = i_pos - i_neg;
  r.events.below_bound = std::abs(diff) < cfg.i_min_sense;

  if (cfg.effects.sa_window) {
    auto outside = [&](double i) { return i < cfg.i_min_sense || i > cfg.i_max; };
    if (outside(i_pos) || outside(i_neg)) {
      r.events.range_violation = true;
      r.bit = stream.next_bit() ? 1 : 0;
      return r;
    }
  }

  double offset = cfg.effects.sa_offset ? sample_sa_offset(p_total, cfg, stream) : 0.0;
  double d = diff + offset;
  r.bit = d > 0 ? 1 : 0;
  r.events.margin_flip = (d > 0) != (diff > 0);
  return r;
}

}  // namespace irsim
