#pragma once

#include <span>
#include <vector>

#include "irsim/core.hpp"
#include "irsim/nonideal.hpp"

namespace irsim {

/// Per-row branch conductances (siemens) for one bit-line: multiplier-adjusted
/// cell conductance when the row is selected, 0 (open) when not. HRS branches
/// are included only while leakage is modeled.
std::vector<double> branch_conductances(const ColumnPattern& column,
                                        std::span<const uint8_t> inputs,
                                        std::span<const double> multipliers,
                                        const DeviceParams& params);

/// Exact nodal solve of the 1-D resistive ladder: series wire segments along
/// the bit-line, parallel cell branches from the drive rail, terminal clamped
/// at the driver. Returns each cell's branch current in units. Acts as the
/// reference a full circuit simulation would give for this topology.
///
/// `segments[k]` is the wire resistance between row k and row k-1 (row 0
/// connects to the driver). Zero-resistance segments are contracted exactly,
/// so r_segment = 0 reproduces the ideal model bit for bit.
std::vector<double> exact_ladder_currents_segments(std::span<const double> conductances,
                                                   std::span<const double> segments,
                                                   const DeviceParams& params);

std::vector<double> exact_ladder_currents(const ColumnPattern& column,
                                          std::span<const uint8_t> inputs,
                                          std::span<const double> multipliers,
                                          const WireModel& wire, const DeviceParams& params);

/// Reduced-ladder node voltages for the block approximation: one node per
/// sub-block, wire lumped to block_size * r_segment between consecutive
/// nodes (and between the driver and block 0). Trailing blocks without
/// branches carry no current and are not solved.
std::vector<double> block_ladder_voltages(std::span<const double> block_conductances,
                                          double r_block, double v_drive);

/// Fast per-cell currents using the block approximation: local IR drop inside
/// a block is neglected, the block current splits among members per branch
/// conductance; global drop across blocks is kept.
std::vector<double> block_approx_currents(const ColumnPattern& column,
                                          std::span<const uint8_t> inputs,
                                          std::span<const double> multipliers,
                                          const WireModel& wire, const DeviceParams& params);

/// Ideal total minus block-approximated total (units) for n_lrs cells placed
/// contiguously starting at the given block. Throws if the placement leaves
/// the array.
double current_drop_profile(int n_lrs, int start_block, const WireModel& wire,
                            const DeviceParams& params, const MacroGeometry& geometry);

}  // namespace irsim
