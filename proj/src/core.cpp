#include "irsim/core.hpp"

#include <stdexcept>
#include <string>

namespace irsim {

void DeviceParams::validate() const {
  if (r_lrs_nominal <= 0 || r_hrs_nominal <= 0)
    throw std::invalid_argument("DeviceParams: resistances must be positive");
  if (r_hrs_nominal / r_lrs_nominal < 1e3)
    throw std::invalid_argument("DeviceParams: r_hrs/r_lrs must be >= 1e3");
  if (v_cell <= 0) throw std::invalid_argument("DeviceParams: v_cell must be positive");
  if (sigma_log_r < 0) throw std::invalid_argument("DeviceParams: sigma_log_r must be >= 0");
}

void MacroGeometry::validate() const {
  if (rows <= 0 || columns <= 0 || block_size <= 0)
    throw std::invalid_argument("MacroGeometry: dimensions must be positive");
  if (rows % block_size != 0)
    throw std::invalid_argument("MacroGeometry: rows must be a multiple of block_size");
  if (!(0 < i_min_sense && i_min_sense < i_max))
    throw std::invalid_argument("MacroGeometry: need 0 < i_min_sense < i_max");
}

int ColumnPattern::lrs_count() const {
  int n = 0;
  for (CellState c : cells) n += (c == CellState::LRS);
  return n;
}

void ColumnPattern::validate() const {
  if (cells.size() != roles.size())
    throw std::invalid_argument("ColumnPattern: cells/roles length mismatch");
}

double ideal_cell_current(CellState state, int input_bit, const DeviceParams& params) {
  if (input_bit == 0) return 0.0;
  return state == CellState::LRS ? 1.0 : params.hrs_leak_units();
}

double ideal_bitline_mac(std::span<const uint8_t> inputs, const ColumnPattern& column,
                         const DeviceParams& params) {
  if (static_cast<int>(inputs.size()) != column.rows())
    throw std::invalid_argument("ideal_bitline_mac: inputs length " +
                                std::to_string(inputs.size()) + " != column rows " +
                                std::to_string(column.rows()));
  double leak = params.hrs_leak_units();
  double sum = 0.0;
  for (int r = 0; r < column.rows(); ++r) {
    if (!inputs[r]) continue;
    sum += column.cells[r] == CellState::LRS ? 1.0 : leak;
  }
  return sum;
}

int activated_lrs_count(std::span<const uint8_t> inputs, const ColumnPattern& column) {
  if (static_cast<int>(inputs.size()) != column.rows())
    throw std::invalid_argument("activated_lrs_count: length mismatch");
  int p = 0;
  for (int r = 0; r < column.rows(); ++r)
    p += (inputs[r] && column.cells[r] == CellState::LRS);
  return p;
}

}  // namespace irsim
