#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace irsim {

/// Binary RRAM cell state. LRS encodes weight bit 1, HRS encodes 0.
/// There are exactly two states; the model has no multilevel cells.
enum class CellState : uint8_t { HRS = 0, LRS = 1 };

/// What a crossbar row is used for inside one mapped column pair.
enum class RowRole : uint8_t { Conv = 0, Bias = 1, Unused = 2 };

/// Nominal device parameters.
///
/// Currents are expressed in "units": one unit is the nominal LRS cell
/// current at the default bias (0.1 V across 1e5 ohm = 1 uA). With that
/// convention the sense-amplifier window reads directly as 35..300 units.
struct DeviceParams {
  double r_lrs_nominal = 1.0e5;    // ohm, formed cell under low word-line bias
  double r_hrs_nominal = 1.0e9;    // ohm, non-formed cell
  double v_cell = 0.1;             // volt across a selected cell
  double wordline_voltage = 0.44;  // volt; enters only through lookup tables
  double sigma_log_r = 0.4245;     // std of ln(resistance) at the default bias
  bool hrs_leakage = true;         // model the ~1e-4 unit HRS contribution

  double i_unit_amperes() const { return v_cell / r_lrs_nominal; }

  /// HRS current in units when selected (0 when leakage is disabled).
  double hrs_leak_units() const {
    return hrs_leakage ? r_lrs_nominal / r_hrs_nominal : 0.0;
  }

  void validate() const;
};

/// Crossbar array dimensions and sensing limits.
struct MacroGeometry {
  int rows = 1024;
  int columns = 1024;
  int block_size = 32;        // rows per IR-drop sub-block
  double i_max = 300.0;       // units, top of the sensing window
  double i_min_sense = 35.0;  // units, bottom of the sensing window

  int blocks() const { return rows / block_size; }
  void validate() const;
};

/// Contents of one bit-line: a cell state and a role per row.
struct ColumnPattern {
  std::vector<CellState> cells;
  std::vector<RowRole> roles;

  ColumnPattern() = default;
  explicit ColumnPattern(int rows)
      : cells(rows, CellState::HRS), roles(rows, RowRole::Unused) {}

  int rows() const { return static_cast<int>(cells.size()); }
  int lrs_count() const;
  void validate() const;  // cells/roles same length
};

/// Current of a single cell in units. A deselected cell (input 0) carries
/// nothing; a selected LRS cell carries one unit; a selected HRS cell carries
/// the leakage ratio r_lrs/r_hrs.
double ideal_cell_current(CellState state, int input_bit, const DeviceParams& params);

/// Sum of ideal cell currents over all rows of one bit-line.
/// Throws std::invalid_argument on length mismatch.
double ideal_bitline_mac(std::span<const uint8_t> inputs, const ColumnPattern& column,
                         const DeviceParams& params);

/// Number of rows that are both selected (input 1) and in LRS. This is the
/// "p" that the accumulation nonlinearity is indexed by.
int activated_lrs_count(std::span<const uint8_t> inputs, const ColumnPattern& column);

}  // namespace irsim
