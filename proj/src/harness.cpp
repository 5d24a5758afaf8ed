#include "irsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "irsim/irdrop.hpp"

namespace irsim {

namespace {

constexpr uint64_t kIrdropCaseTag = 0x69726472ULL;

std::string mode_string(AccumulationMode m) {
  if (m.kind == AccumulationMode::Kind::SingleShot) return "single-shot";
  return "partial-sum:" + std::to_string(m.k_subblocks);
}

std::string style_string(MappingStyle s) {
  return s == MappingStyle::BaselineBn ? "baseline" : "proposed";
}

std::string spec_param_string(const ExperimentSpec& spec, const std::string& command) {
  std::ostringstream os;
  os << command << "|style=" << style_string(spec.style) << "|mode=" << mode_string(spec.mode)
     << "|seeds=";
  for (uint64_t s : spec.seeds) os << s << ";";
  os << "|sigma_axis=";
  for (double v : spec.sigma_axis) os << v << ";";
  os << "|voltage_axis=";
  for (double v : spec.voltage_axis) os << v << ";";
  os << "|extra_axis=";
  for (double v : spec.margin_extra_axis) os << v << ";";
  os << "|irdrop_cases=" << spec.irdrop_cases
     << "|cal=" << spec.calibration.candidate_min << ".." << spec.calibration.candidate_max << ","
     << spec.calibration.target_below_bound;
  return os.str();
}

std::string make_fingerprint(const ExperimentInputs& in, const ExperimentSpec& spec,
                             const std::string& command) {
  uint64_t h = fnv1a64(in.model.to_bytes());
  h = fnv1a64(in.data.to_bytes(), h);
  h = fnv1a64(in.config.serialize(), h);
  if (in.manifest) h = fnv1a64(in.manifest->serialize(), h);
  h = fnv1a64(spec_param_string(spec, command), h);
  return hash_hex(h);
}

struct RunResult {
  std::vector<double> per_seed_accuracy;  // percent
  double mean = 0;
  std::optional<double> stddev;
  std::vector<LayerRates> layers;
  double power_proxy = 0;
};

RunResult run_seeds(const ExperimentInputs& in, const ExperimentSpec& spec,
                    const SimulationConfig& config, const MappingManifest& manifest) {
  auto mapped = materialize_layers(in.model, manifest, config.geom);
  const int n = in.data.samples();

  RunResult out;
  std::vector<LayerEventStats> pooled(manifest.layers.size());
  double power_sum = 0.0;

  for (uint64_t seed : spec.seeds) {
    NonidealConfig cfg = config.cfg;
    cfg.seed = seed;
    MacroEngine engine(config.dev, config.geom, cfg, spec.mode, spec.policy);
    int hits = 0;
    double power_units = 0.0;
    std::vector<LayerEventStats> stats(manifest.layers.size());
    for (int s = 0; s < n; ++s) {
      auto r = engine.forward(in.model, manifest, mapped.data(), in.data.sample(s),
                              static_cast<uint64_t>(s));
      hits += (r.predicted == in.data.labels[s]);
      power_units += r.power_units;
      for (size_t li = 0; li < stats.size(); ++li) stats[li].merge(r.layer_stats[li]);
    }
    out.per_seed_accuracy.push_back(100.0 * hits / n);
    power_sum += power_units;
    for (size_t li = 0; li < pooled.size(); ++li) pooled[li].merge(stats[li]);
  }

  const size_t ns = spec.seeds.size();
  double mean = 0;
  for (double a : out.per_seed_accuracy) mean += a;
  mean /= static_cast<double>(ns);
  out.mean = mean;
  if (ns > 1) {
    double ss = 0;
    for (double a : out.per_seed_accuracy) ss += (a - mean) * (a - mean);
    out.stddev = std::sqrt(ss / static_cast<double>(ns - 1));
  }

  for (size_t li = 0; li < pooled.size(); ++li) {
    const auto& p = pooled[li];
    LayerRates r;
    r.name = manifest.layers[li].name;
    r.sa_calls = p.sa_calls;
    if (p.sa_calls) {
      r.margin_flip_pct = 100.0 * p.margin_flips / p.sa_calls;
      r.below_bound_pct = 100.0 * p.below_bound / p.sa_calls;
      r.range_violation_pct = 100.0 * p.range_violations / p.sa_calls;
      r.domain_clamp_pct = 100.0 * p.domain_clamps / p.sa_calls;
    }
    out.layers.push_back(r);
  }

  double mean_units = power_sum / static_cast<double>(ns);
  out.power_proxy = power_proxy(mean_units, config.dev.wordline_voltage, config.voltage_table);
  return out;
}

MappingManifest manifest_for(const ExperimentInputs& in, const ExperimentSpec& spec) {
  if (in.manifest) return *in.manifest;
  return build_manifest(in.model, in.config.geom, spec.style, in.config.distribution_tolerance);
}

}  // namespace

void ExperimentSpec::validate() const {
  if (seeds.empty()) throw std::invalid_argument("spec: seeds list must not be empty");
  mode.validate();
  if (irdrop_cases <= 0) throw std::invalid_argument("spec: irdrop_cases must be positive");
}

SimulationReport cmd_simulate(const ExperimentInputs& in, const ExperimentSpec& spec) {
  spec.validate();
  in.config.validate();
  in.model.validate();
  in.data.validate();
  MappingManifest manifest = manifest_for(in, spec);
  RunResult r = run_seeds(in, spec, in.config, manifest);

  SimulationReport rep;
  rep.style = style_string(spec.style);
  rep.mode = mode_string(spec.mode);
  rep.fingerprint = make_fingerprint(in, spec, "simulate");
  rep.seeds = spec.seeds;
  rep.per_seed_accuracy = r.per_seed_accuracy;
  rep.accuracy_mean = r.mean;
  rep.accuracy_std = r.stddev;
  rep.layers = r.layers;
  rep.power_proxy = r.power_proxy;
  return rep;
}

SweepReport cmd_sweep_wl(const ExperimentInputs& in, const ExperimentSpec& spec) {
  spec.validate();
  in.config.validate();
  SweepReport rep;
  rep.command = "sweep-wl";
  rep.fingerprint = make_fingerprint(in, spec, "sweep-wl");

  MappingManifest manifest = manifest_for(in, spec);

  if (!spec.voltage_axis.empty()) {
    for (double v : spec.voltage_axis) {
      const WlVoltagePoint* p = in.config.find_voltage(v);
      if (!p)
        throw std::invalid_argument("sweep-wl: voltage " + std::to_string(v) +
                                    " not in the configured table");
      SimulationConfig c = in.config;
      c.dev.wordline_voltage = v;
      c.cfg.sigma_log_r = p->sigma_log_r;
      c.sync();
      RunResult r = run_seeds(in, spec, c, manifest);
      rep.rows.push_back({v, p->sigma_log_r, std::nullopt, r.mean, r.stddev, r.power_proxy});
    }
  }
  for (double sigma : spec.sigma_axis) {
    SimulationConfig c = in.config;
    c.cfg.sigma_log_r = sigma;
    c.sync();
    RunResult r = run_seeds(in, spec, c, manifest);
    rep.rows.push_back({std::nullopt, sigma, std::nullopt, r.mean, r.stddev, r.power_proxy});
  }
  return rep;
}

SweepReport cmd_tolerance(const ExperimentInputs& in, const ExperimentSpec& spec) {
  spec.validate();
  in.config.validate();
  SweepReport rep;
  rep.command = "tolerance";
  rep.fingerprint = make_fingerprint(in, spec, "tolerance");
  MappingManifest manifest = manifest_for(in, spec);
  for (double extra : spec.margin_extra_axis) {
    SimulationConfig c = in.config;
    c.cfg.sa_margin_extra = extra;
    RunResult r = run_seeds(in, spec, c, manifest);
    rep.rows.push_back({std::nullopt, c.cfg.sigma_log_r, extra, r.mean, r.stddev, r.power_proxy});
  }
  return rep;
}

CalibrateReport cmd_calibrate(const ExperimentInputs& in, const ExperimentSpec& spec) {
  spec.validate();
  in.config.validate();
  if (spec.style != MappingStyle::ProposedNoBn)
    throw std::invalid_argument("calibrate: only the proposed style carries an extra bias");
  MappingManifest manifest = manifest_for(in, spec);

  NonidealConfig cfg = in.config.cfg;
  cfg.seed = spec.seeds.front();
  MacroEngine engine(in.config.dev, in.config.geom, cfg, spec.mode, spec.policy);
  auto cals = calibrate_extra_bias(in.model, manifest, in.data, engine, spec.calibration);

  CalibrateReport rep;
  rep.fingerprint = make_fingerprint(in, spec, "calibrate");
  for (const auto& c : cals) {
    CalibrateLayerRow row;
    row.name = manifest.layers[c.layer_index].name;
    row.bias_units = c.bias_units;
    row.met_target = c.met_target;
    row.pre_flip_pct = 100.0 * c.pre_flip;
    row.pre_below_pct = 100.0 * c.pre_below;
    row.post_flip_pct = 100.0 * c.post_flip;
    row.post_below_pct = 100.0 * c.post_below;
    rep.layers.push_back(row);
  }
  rep.manifest_text = manifest.serialize();
  return rep;
}

IrdropReport cmd_irdrop_validate(const SimulationConfig& config, const ExperimentSpec& spec) {
  spec.validate();
  config.validate();
  const int n_cases = spec.irdrop_cases;
  const int rows = config.geom.rows;

  std::vector<double> errors(n_cases, 0.0);
  const bool parallel = spec.policy == ExecutionPolicy::Parallel;
#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < n_cases; ++i) {
    RngStream rs = RngStream(config.cfg.seed).child(kIrdropCaseTag).child(static_cast<uint64_t>(i));
    double lrs_frac = 0.05 + 0.45 * rs.next_unit();
    double input_frac = 0.3 + 0.7 * rs.next_unit();

    ColumnPattern col(rows);
    std::vector<uint8_t> inputs(rows, 0);
    std::vector<double> mult(rows, 1.0);
    for (int r = 0; r < rows; ++r) {
      if (rs.next_unit() < lrs_frac) {
        col.cells[r] = CellState::LRS;
        col.roles[r] = RowRole::Conv;
      }
      inputs[r] = rs.next_unit() < input_frac ? 1 : 0;
      mult[r] = std::exp(-config.cfg.sigma_log_r * rs.next_normal());
    }

    auto exact = exact_ladder_currents(col, inputs, mult, config.cfg.wire, config.dev);
    auto approx = block_approx_currents(col, inputs, mult, config.cfg.wire, config.dev);
    double te = 0, ta = 0;
    for (int r = 0; r < rows; ++r) {
      te += exact[r];
      ta += approx[r];
    }
    errors[i] = te > 0 ? std::abs(ta - te) / te : 0.0;
  }

  IrdropReport rep;
  uint64_t h = fnv1a64(config.serialize());
  h = fnv1a64(spec_param_string(spec, "irdrop-validate"), h);
  rep.fingerprint = hash_hex(h);
  rep.cases = n_cases;

  size_t worst = 0;
  for (size_t i = 1; i < errors.size(); ++i)
    if (errors[i] > errors[worst]) worst = i;
  rep.worst_case_seed = worst;
  rep.max_error = errors[worst];
  int within = 0;
  for (double e : errors) within += (e <= 0.01);
  rep.within_1pct_fraction = static_cast<double>(within) / n_cases;

  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  auto pct = [&](double q) {
    size_t idx = static_cast<size_t>(q * (sorted.size() - 1));
    return sorted[idx];
  };
  rep.p50 = pct(0.50);
  rep.p90 = pct(0.90);
  rep.p95 = pct(0.95);
  rep.p99 = pct(0.99);
  return rep;
}

}  // namespace irsim
