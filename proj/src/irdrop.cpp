#include "irsim/irdrop.hpp"

#include <cmath>
#include <stdexcept>

namespace irsim {

namespace {

// Thomas algorithm. Solves the tridiagonal system with the given diagonals in
// place and returns the solution. sub[0] and sup[m-1] are unused.
std::vector<double> solve_tridiag(std::vector<double> sub, std::vector<double> diag,
                                  std::vector<double> sup, std::vector<double> rhs) {
  const int m = static_cast<int>(diag.size());
  for (int i = 1; i < m; ++i) {
    double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> v(m, 0.0);
  v[m - 1] = rhs[m - 1] / diag[m - 1];
  for (int i = m - 2; i >= 0; --i) v[i] = (rhs[i] - sup[i] * v[i + 1]) / diag[i];
  return v;
}

// Ladder KCL over chain nodes with conductance couplings cup[i] = 1/s_i to the
// previous node (node 0 couples to the driver, clamped at 0 V) and branch
// conductance G_i to the drive rail at v_drive. Returns node voltages.
std::vector<double> ladder_voltages(const std::vector<double>& cup, const std::vector<double>& G,
                                    double v_drive) {
  const int m = static_cast<int>(cup.size());
  std::vector<double> sub(m, 0.0), diag(m, 0.0), sup(m, 0.0), rhs(m, 0.0);
  for (int i = 0; i < m; ++i) {
    diag[i] = cup[i] + G[i] + (i + 1 < m ? cup[i + 1] : 0.0);
    rhs[i] = G[i] * v_drive;
    if (i > 0) sub[i] = -cup[i];
    if (i + 1 < m) sup[i] = -cup[i + 1];
  }
  return solve_tridiag(std::move(sub), std::move(diag), std::move(sup), std::move(rhs));
}

// Shared row-level solve. Rows connected by zero-resistance segments collapse
// into one electrical node; a leading zero segment pins its node to the
// driver potential. Returns per-row currents in units.
std::vector<double> solve_rows(std::span<const double> g, std::span<const double> seg,
                               const DeviceParams& params) {
  const int n = static_cast<int>(g.size());
  if (static_cast<int>(seg.size()) != n)
    throw std::invalid_argument("ladder solve: segments length mismatch");
  const double v_drive = params.v_cell;
  const double i_unit = params.i_unit_amperes();

  std::vector<int> node_of(n, -1);
  std::vector<double> node_g, node_seg;
  for (int r = 0; r < n; ++r) {
    if (r == 0 || seg[r] > 0.0) {
      node_g.push_back(0.0);
      node_seg.push_back(seg[r]);
    }
    node_of[r] = static_cast<int>(node_g.size()) - 1;
    node_g.back() += g[r];
  }

  const int nn = static_cast<int>(node_g.size());
  std::vector<double> v(nn, 0.0);
  const int first = (nn > 0 && node_seg[0] == 0.0) ? 1 : 0;  // pinned prefix at 0 V
  if (nn - first > 0) {
    std::vector<double> cup(node_seg.begin() + first, node_seg.end());
    std::vector<double> G(node_g.begin() + first, node_g.end());
    for (double& c : cup) c = 1.0 / c;
    auto sol = ladder_voltages(cup, G, v_drive);
    for (size_t i = 0; i < sol.size(); ++i) v[first + i] = sol[i];
  }

  std::vector<double> currents(n, 0.0);
  for (int r = 0; r < n; ++r) {
    if (g[r] == 0.0) continue;
    currents[r] = g[r] * (v_drive - v[node_of[r]]) / i_unit;
  }
  return currents;
}

}  // namespace

std::vector<double> branch_conductances(const ColumnPattern& column,
                                        std::span<const uint8_t> inputs,
                                        std::span<const double> multipliers,
                                        const DeviceParams& params) {
  const int n = column.rows();
  if (static_cast<int>(inputs.size()) != n)
    throw std::invalid_argument("branch_conductances: inputs length mismatch");
  if (!multipliers.empty() && static_cast<int>(multipliers.size()) != n)
    throw std::invalid_argument("branch_conductances: multipliers length mismatch");

  std::vector<double> g(n, 0.0);
  const double g_lrs = 1.0 / params.r_lrs_nominal;
  const double g_hrs = params.hrs_leakage ? 1.0 / params.r_hrs_nominal : 0.0;
  for (int r = 0; r < n; ++r) {
    if (!inputs[r]) continue;
    double base = column.cells[r] == CellState::LRS ? g_lrs : g_hrs;
    g[r] = base * (multipliers.empty() ? 1.0 : multipliers[r]);
  }
  return g;
}

std::vector<double> exact_ladder_currents_segments(std::span<const double> conductances,
                                                   std::span<const double> segments,
                                                   const DeviceParams& params) {
  for (double s : segments)
    if (s < 0) throw std::invalid_argument("ladder: negative segment resistance");
  return solve_rows(conductances, segments, params);
}

std::vector<double> exact_ladder_currents(const ColumnPattern& column,
                                          std::span<const uint8_t> inputs,
                                          std::span<const double> multipliers,
                                          const WireModel& wire, const DeviceParams& params) {
  wire.validate();
  auto g = branch_conductances(column, inputs, multipliers, params);
  std::vector<double> seg(column.rows(), wire.r_segment);
  return solve_rows(g, seg, params);
}

std::vector<double> block_ladder_voltages(std::span<const double> block_conductances,
                                          double r_block, double v_drive) {
  int nb = static_cast<int>(block_conductances.size());
  while (nb > 0 && block_conductances[nb - 1] == 0.0) --nb;  // no current past the last branch
  std::vector<double> v(block_conductances.size(), 0.0);
  if (nb == 0 || r_block == 0.0) return v;

  std::vector<double> cup(nb, 1.0 / r_block);
  std::vector<double> G(block_conductances.begin(), block_conductances.begin() + nb);
  auto sol = ladder_voltages(cup, G, v_drive);
  for (int i = 0; i < nb; ++i) v[i] = sol[i];
  return v;
}

std::vector<double> block_approx_currents(const ColumnPattern& column,
                                          std::span<const uint8_t> inputs,
                                          std::span<const double> multipliers,
                                          const WireModel& wire, const DeviceParams& params) {
  wire.validate();
  const int n = column.rows();
  if (n % wire.block_size != 0)
    throw std::invalid_argument("block_approx_currents: rows must be a multiple of block_size");
  auto g = branch_conductances(column, inputs, multipliers, params);

  const int nb = n / wire.block_size;
  std::vector<double> bg(nb, 0.0);
  for (int r = 0; r < n; ++r) bg[r / wire.block_size] += g[r];

  auto v = block_ladder_voltages(bg, wire.block_size * wire.r_segment, params.v_cell);

  const double i_unit = params.i_unit_amperes();
  std::vector<double> currents(n, 0.0);
  for (int r = 0; r < n; ++r) {
    if (g[r] == 0.0) continue;
    currents[r] = g[r] * (params.v_cell - v[r / wire.block_size]) / i_unit;
  }
  return currents;
}

double current_drop_profile(int n_lrs, int start_block, const WireModel& wire,
                            const DeviceParams& params, const MacroGeometry& geometry) {
  if (n_lrs < 0) throw std::invalid_argument("current_drop_profile: n_lrs must be >= 0");
  if (n_lrs == 0) return 0.0;
  const int start_row = start_block * wire.block_size;
  if (start_block < 0 || start_row + n_lrs > geometry.rows)
    throw std::out_of_range("current_drop_profile: placement leaves the array");

  ColumnPattern col(geometry.rows);
  std::vector<uint8_t> inputs(geometry.rows, 0);
  for (int i = 0; i < n_lrs; ++i) {
    col.cells[start_row + i] = CellState::LRS;
    col.roles[start_row + i] = RowRole::Conv;
    inputs[start_row + i] = 1;
  }
  auto currents = block_approx_currents(col, inputs, {}, wire, params);
  double total = 0.0;
  for (double c : currents) total += c;
  return static_cast<double>(n_lrs) - total;
}

}  // namespace irsim
