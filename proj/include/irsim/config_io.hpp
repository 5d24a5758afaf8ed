#pragma once

#include <string>
#include <vector>

#include "irsim/core.hpp"
#include "irsim/nonideal.hpp"

namespace irsim {

/// Full runtime configuration: device, array geometry, effect parameters and
/// the word-line voltage table. Serialized as a line-oriented key = value
/// file ('#' starts a comment); the seed is mandatory in serialized form.
struct SimulationConfig {
  DeviceParams dev;
  MacroGeometry geom;
  NonidealConfig cfg;
  std::vector<WlVoltagePoint> voltage_table = {{0.44, 0.4245, 1.0}};
  double distribution_tolerance = 0.05;

  void validate() const;

  /// Keep the duplicated fields (sigma, window, block size) consistent:
  /// NonidealConfig holds the runtime values, the others mirror them.
  void sync();

  std::string serialize() const;
  static SimulationConfig parse(const std::string& text);
  void save(const std::string& path) const;
  static SimulationConfig load(const std::string& path);

  const WlVoltagePoint* find_voltage(double v) const;
};

}  // namespace irsim
