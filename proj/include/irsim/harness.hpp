#pragma once

#include <optional>
#include <string>
#include <vector>

#include "irsim/calibrate.hpp"
#include "irsim/config_io.hpp"
#include "irsim/inference.hpp"
#include "irsim/report.hpp"

namespace irsim {

/// Everything a command needs, already parsed. The CLI fills this from
/// files; tests construct it directly.
struct ExperimentInputs {
  TernaryConvModel model;
  Dataset data;
  SimulationConfig config;
  std::optional<MappingManifest> manifest;  // else built from style
};

struct ExperimentSpec {
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  AccumulationMode mode = AccumulationMode::single_shot();
  MappingStyle style = MappingStyle::ProposedNoBn;
  ExecutionPolicy policy = ExecutionPolicy::Parallel;

  std::vector<double> sigma_axis;              // sweep-wl over device spread
  std::vector<double> voltage_axis;            // sweep-wl over table voltages
  std::vector<double> margin_extra_axis = {0, 1, 2, 3};
  int irdrop_cases = 1000;
  CalibrationOptions calibration;

  void validate() const;
};

SimulationReport cmd_simulate(const ExperimentInputs& in, const ExperimentSpec& spec);
SweepReport cmd_sweep_wl(const ExperimentInputs& in, const ExperimentSpec& spec);
SweepReport cmd_tolerance(const ExperimentInputs& in, const ExperimentSpec& spec);
CalibrateReport cmd_calibrate(const ExperimentInputs& in, const ExperimentSpec& spec);
IrdropReport cmd_irdrop_validate(const SimulationConfig& config, const ExperimentSpec& spec);

}  // namespace irsim
