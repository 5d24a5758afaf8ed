#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "irsim/fixture.hpp"
#include "irsim/harness.hpp"

namespace {

using namespace irsim;

struct CommonArgs {
  std::string model_path, data_path, config_path, manifest_path;
  std::string out_path, csv_path;
  std::vector<uint64_t> seeds;
  std::string mode = "single-shot";
  std::string style = "proposed";
  bool serial = false;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool needs_model = true) {
  if (needs_model) {
    cmd->add_option("--model", a.model_path, "model container file")->required();
    cmd->add_option("--data", a.data_path, "dataset container file")->required();
  }
  cmd->add_option("--config", a.config_path, "simulation config file")->required();
  cmd->add_option("--manifest", a.manifest_path, "mapping manifest (else built from --style)");
  cmd->add_option("--out", a.out_path, "JSON report file (appended)");
  cmd->add_option("--csv", a.csv_path, "CSV table file (appended)");
  cmd->add_option("--seeds", a.seeds, "seed list (default 1..10)")->delimiter(',');
  cmd->add_option("--mode", a.mode, "single-shot | partial-sum:k");
  cmd->add_option("--style", a.style, "proposed | baseline");
  cmd->add_flag("--serial", a.serial, "disable the parallel kernels");
}

AccumulationMode parse_mode(const std::string& s) {
  if (s == "single-shot") return AccumulationMode::single_shot();
  const std::string prefix = "partial-sum:";
  if (s.rfind(prefix, 0) == 0) return AccumulationMode::partial_sum(std::stoi(s.substr(prefix.size())));
  throw CLI::ValidationError("--mode", "expected single-shot or partial-sum:k");
}

MappingStyle parse_style(const std::string& s) {
  if (s == "proposed") return MappingStyle::ProposedNoBn;
  if (s == "baseline") return MappingStyle::BaselineBn;
  throw CLI::ValidationError("--style", "expected proposed or baseline");
}

ExperimentInputs load_inputs(const CommonArgs& a, bool needs_model) {
  ExperimentInputs in;
  in.config = SimulationConfig::load(a.config_path);
  if (needs_model) {
    in.model = TernaryConvModel::load(a.model_path);
    in.data = Dataset::load(a.data_path);
  }
  if (!a.manifest_path.empty())
    in.manifest = MappingManifest::parse(read_file_bytes(a.manifest_path));
  return in;
}

ExperimentSpec make_spec(const CommonArgs& a) {
  ExperimentSpec spec;
  if (!a.seeds.empty()) spec.seeds = a.seeds;
  spec.mode = parse_mode(a.mode);
  spec.style = parse_style(a.style);
  spec.policy = a.serial ? ExecutionPolicy::Serial : ExecutionPolicy::Parallel;
  return spec;
}

void emit(const CommonArgs& a, const std::string& json, const std::string& csv) {
  if (!a.out_path.empty()) append_report(a.out_path, json);
  if (!a.csv_path.empty() && !csv.empty()) append_report(a.csv_path, csv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"irsim: in-RRAM-computing macro simulator and weight-mapping toolchain"};
  app.require_subcommand(1);

  CommonArgs sim_a, sweep_a, cal_a, ird_a, tol_a;

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo accuracy evaluation over seeds");
  add_common(sim, sim_a);

  auto* sweep = app.add_subcommand("sweep-wl", "word-line voltage / device-spread sweep");
  add_common(sweep, sweep_a);
  std::vector<double> sigma_axis, voltage_axis;
  sweep->add_option("--sigma-axis", sigma_axis, "device log-resistance spreads")->delimiter(',');
  sweep->add_option("--voltages", voltage_axis, "voltages present in the config table")
      ->delimiter(',');

  auto* cal = app.add_subcommand("calibrate", "layerwise extra-bias calibration");
  add_common(cal, cal_a);
  int cand_min = 0, cand_max = 64;
  double target_below = 0.03;
  cal->add_option("--bias-min", cand_min, "smallest bias candidate");
  cal->add_option("--bias-max", cand_max, "largest bias candidate");
  cal->add_option("--target-below", target_below, "below-lower-bound rate target");

  auto* ird = app.add_subcommand("irdrop-validate", "block model vs exact ladder solver");
  add_common(ird, ird_a, false);
  int cases = 1000;
  ird->add_option("--cases", cases, "number of random pattern/input cases");

  auto* tol = app.add_subcommand("tolerance", "sense-amplifier margin tolerance sweep");
  add_common(tol, tol_a);
  std::vector<double> extra_axis = {0, 1, 2, 3};
  tol->add_option("--extra-axis", extra_axis, "sa_margin_extra values")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      auto in = load_inputs(sim_a, true);
      auto rep = cmd_simulate(in, make_spec(sim_a));
      emit(sim_a, rep.to_json(), "");
      std::cout << "accuracy " << rep.accuracy_mean << "%"
                << (rep.accuracy_std ? " +/- " + std::to_string(*rep.accuracy_std) : "")
                << "  fingerprint " << rep.fingerprint << "\n";
    } else if (sweep->parsed()) {
      auto in = load_inputs(sweep_a, true);
      auto spec = make_spec(sweep_a);
      spec.sigma_axis = sigma_axis;
      spec.voltage_axis = voltage_axis;
      auto rep = cmd_sweep_wl(in, spec);
      emit(sweep_a, rep.to_json(), rep.to_csv());
      std::cout << rep.to_csv();
    } else if (cal->parsed()) {
      auto in = load_inputs(cal_a, true);
      auto spec = make_spec(cal_a);
      spec.calibration.candidate_min = cand_min;
      spec.calibration.candidate_max = cand_max;
      spec.calibration.target_below_bound = target_below;
      auto rep = cmd_calibrate(in, spec);
      emit(cal_a, rep.to_json(), rep.to_csv());
      if (!cal_a.manifest_path.empty())
        write_file_bytes(cal_a.manifest_path + ".calibrated", rep.manifest_text);
      std::cout << rep.to_csv();
    } else if (ird->parsed()) {
      auto config = SimulationConfig::load(ird_a.config_path);
      auto spec = make_spec(ird_a);
      spec.irdrop_cases = cases;
      auto rep = cmd_irdrop_validate(config, spec);
      emit(ird_a, rep.to_json(), rep.to_csv());
      std::cout << rep.to_csv();
    } else if (tol->parsed()) {
      auto in = load_inputs(tol_a, true);
      auto spec = make_spec(tol_a);
      spec.margin_extra_axis = extra_axis;
      auto rep = cmd_tolerance(in, spec);
      emit(tol_a, rep.to_json(), rep.to_csv());
      std::cout << rep.to_csv();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
