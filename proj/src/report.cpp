#include "irsim/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace irsim {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string csv_num(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

ordered_json rates_json(const std::vector<LayerRates>& layers) {
  ordered_json arr = ordered_json::array();
  for (const auto& l : layers) {
    arr.push_back({{"name", l.name},
                   {"sa_calls", l.sa_calls},
                   {"margin_flip_pct", l.margin_flip_pct},
                   {"below_bound_pct", l.below_bound_pct},
                   {"range_violation_pct", l.range_violation_pct},
                   {"domain_clamp_pct", l.domain_clamp_pct}});
  }
  return arr;
}

}  // namespace

std::string SimulationReport::to_json() const {
  ordered_json j;
  j["tool"] = "irsim";
  j["report_version"] = 1;
  j["command"] = command;
  j["style"] = style;
  j["mode"] = mode;
  j["metric"] = metric_note;
  j["fingerprint"] = fingerprint;
  j["seeds"] = seeds;
  j["accuracy"] = {{"per_seed", per_seed_accuracy}, {"mean", accuracy_mean}};
  if (accuracy_std) j["accuracy"]["std"] = *accuracy_std;
  j["layers"] = rates_json(layers);
  j["power_proxy"] = power_proxy;
  return j.dump(2);
}

std::string SweepReport::to_csv() const {
  std::ostringstream os;
  os << "voltage,sigma,sa_margin_extra,accuracy_mean,accuracy_std,power_proxy\n";
  for (const auto& r : rows) {
    os << (r.voltage ? csv_num(*r.voltage) : "") << "," << csv_num(r.sigma) << ","
       << (r.sa_margin_extra ? csv_num(*r.sa_margin_extra) : "") << ","
       << csv_num(r.accuracy_mean) << "," << (r.accuracy_std ? csv_num(*r.accuracy_std) : "")
       << "," << csv_num(r.power_proxy) << "\n";
  }
  return os.str();
}

std::string SweepReport::to_json() const {
  ordered_json j;
  j["tool"] = "irsim";
  j["report_version"] = 1;
  j["command"] = command;
  j["fingerprint"] = fingerprint;
  ordered_json rows_j = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json row;
    if (r.voltage) row["voltage"] = *r.voltage;
    row["sigma"] = r.sigma;
    if (r.sa_margin_extra) row["sa_margin_extra"] = *r.sa_margin_extra;
    row["accuracy_mean"] = r.accuracy_mean;
    if (r.accuracy_std) row["accuracy_std"] = *r.accuracy_std;
    row["power_proxy"] = r.power_proxy;
    rows_j.push_back(row);
  }
  j["rows"] = rows_j;
  return j.dump(2);
}

std::string CalibrateReport::to_csv() const {
  std::ostringstream os;
  os << "metric";
  for (const auto& l : layers) os << "," << l.name;
  os << "\n";
  auto row = [&](const char* name, auto get) {
    os << name;
    for (const auto& l : layers) os << "," << csv_num(get(l));
    os << "\n";
  };
  row("sensing_variation_pct_without_bias", [](const auto& l) { return l.pre_flip_pct; });
  row("below_lower_bound_pct_without_bias", [](const auto& l) { return l.pre_below_pct; });
  row("sensing_variation_pct_with_bias", [](const auto& l) { return l.post_flip_pct; });
  row("below_lower_bound_pct_with_bias", [](const auto& l) { return l.post_below_pct; });
  os << "extra_bias_units";
  for (const auto& l : layers) os << "," << l.bias_units;
  os << "\n";
  return os.str();
}

std::string CalibrateReport::to_json() const {
  ordered_json j;
  j["tool"] = "irsim";
  j["report_version"] = 1;
  j["command"] = command;
  j["fingerprint"] = fingerprint;
  ordered_json arr = ordered_json::array();
  for (const auto& l : layers) {
    arr.push_back({{"name", l.name},
                   {"extra_bias_units", l.bias_units},
                   {"met_target", l.met_target},
                   {"pre_flip_pct", l.pre_flip_pct},
                   {"pre_below_pct", l.pre_below_pct},
                   {"post_flip_pct", l.post_flip_pct},
                   {"post_below_pct", l.post_below_pct}});
  }
  j["layers"] = arr;
  j["manifest"] = manifest_text;
  return j.dump(2);
}

std::string IrdropReport::to_csv() const {
  std::ostringstream os;
  os << "metric,value\n";
  os << "cases," << cases << "\n";
  os << "p50_relative_error," << csv_num(p50) << "\n";
  os << "p90_relative_error," << csv_num(p90) << "\n";
  os << "p95_relative_error," << csv_num(p95) << "\n";
  os << "p99_relative_error," << csv_num(p99) << "\n";
  os << "max_relative_error," << csv_num(max_error) << "\n";
  os << "worst_case_seed," << worst_case_seed << "\n";
  os << "within_1pct_fraction," << csv_num(within_1pct_fraction) << "\n";
  return os.str();
}

std::string IrdropReport::to_json() const {
  ordered_json j;
  j["tool"] = "irsim";
  j["report_version"] = 1;
  j["command"] = command;
  j["fingerprint"] = fingerprint;
  j["cases"] = cases;
  j["relative_error"] = {{"p50", p50}, {"p90", p90}, {"p95", p95}, {"p99", p99},
                         {"max", max_error}};
  j["worst_case_seed"] = worst_case_seed;
  j["within_1pct_fraction"] = within_1pct_fraction;
  return j.dump(2);
}

void append_report(const std::string& path, const std::string& record) {
  std::ofstream f(path, std::ios::binary | std::ios::app);
  if (!f) throw std::runtime_error("cannot open report file: " + path);
  f.write(record.data(), static_cast<std::streamsize>(record.size()));
  f.put('\n');
  if (!f) throw std::runtime_error("report write failed: " + path);
}

}  // namespace irsim
