#pragma once

#include <optional>
#include <string>
#include <vector>

#include "irsim/inference.hpp"

namespace irsim {

struct LayerRates {
  std::string name;
  uint64_t sa_calls = 0;
  double margin_flip_pct = 0;
  double below_bound_pct = 0;
  double range_violation_pct = 0;
  double domain_clamp_pct = 0;
};

/// Aggregated outcome of one simulate run (one or more seeds).
struct SimulationReport {
  std::string command = "simulate";
  std::string style;
  std::string mode;
  std::string fingerprint;  // hash over every input byte and run parameter
  std::string metric_note =
      "top-1 classification accuracy on the desk-scale fixture (stand-in for mAP)";
  std::vector<uint64_t> seeds;
  std::vector<double> per_seed_accuracy;
  double accuracy_mean = 0;
  std::optional<double> accuracy_std;  // sample std; absent for a single seed
  std::vector<LayerRates> layers;      // rates pooled across seeds
  double power_proxy = 0;              // voltage-scaled summed bit-line current

  std::string to_json() const;
};

struct SweepRow {
  std::optional<double> voltage;
  double sigma = 0;
  std::optional<double> sa_margin_extra;
  double accuracy_mean = 0;
  std::optional<double> accuracy_std;
  double power_proxy = 0;
};

struct SweepReport {
  std::string command;
  std::string fingerprint;
  std::vector<SweepRow> rows;

  std::string to_csv() const;
  std::string to_json() const;
};

struct CalibrateLayerRow {
  std::string name;
  int bias_units = 0;
  bool met_target = false;
  double pre_flip_pct = 0, pre_below_pct = 0;
  double post_flip_pct = 0, post_below_pct = 0;
};

struct CalibrateReport {
  std::string command = "calibrate";
  std::string fingerprint;
  std::vector<CalibrateLayerRow> layers;
  std::string manifest_text;  // calibrated manifest, serialized

  std::string to_csv() const;  // rate table: with / without extra bias
  std::string to_json() const;
};

struct IrdropReport {
  std::string command = "irdrop-validate";
  std::string fingerprint;
  int cases = 0;
  double p50 = 0, p90 = 0, p95 = 0, p99 = 0, max_error = 0;
  uint64_t worst_case_seed = 0;
  double within_1pct_fraction = 0;

  std::string to_csv() const;
  std::string to_json() const;
};

/// Append one record to a report file; existing content is never rewritten.
void append_report(const std::string& path, const std::string& record);

}  // namespace irsim
