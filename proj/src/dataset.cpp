#include "dispersim/dataset.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "dispersim/curve.hpp"
#include "dispersim/error.hpp"

namespace dispersim {

namespace {

constexpr double kNodeTol = 1e-12;

std::vector<double> unique_sorted(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  std::vector<double> out;
  for (double x : xs)
    if (out.empty() || x - out.back() > kNodeTol) out.push_back(x);
  return out;
}

Eigen::Index node_index(const std::vector<double>& nodes, double x) {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), x - kNodeTol);
  if (it == nodes.end() || std::abs(*it - x) > kNodeTol)
    throw ValidationError("coordinate is not a mesh node");
  return it - nodes.begin();
}

std::vector<int> constrained_dofs(BoundaryCondition bc) {
  switch (bc) {
    case BoundaryCondition::Free: return {};
    case BoundaryCondition::Clamped: return {0, 1, 2};
    case BoundaryCondition::Pinned: return {0, 1};
  }
  return {};
}

// Assembles the global dynamic stiffness on `nodes`, eliminates constrained
// DOFs and solves for the nodal response to `load` (length 3 * nodes).
Eigen::VectorXcd solve_global(const WaveguideSpec& spec, const WavenumberSet& waves,
                              const std::vector<double>& nodes, const Eigen::VectorXcd& load) {
  const Eigen::Index n_dof = 3 * static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(n_dof, n_dof);
  for (std::size_t e = 0; e + 1 < nodes.size(); ++e) {
    const Matrix6c ke = element_stiffness(spec, waves, nodes[e + 1] - nodes[e]);
    K.block<6, 6>(3 * e, 3 * e) += ke;
  }

  std::vector<bool> fixed(n_dof, false);
  for (int d : constrained_dofs(spec.bc_left)) fixed[d] = true;
  for (int d : constrained_dofs(spec.bc_right)) fixed[n_dof - 3 + d] = true;
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < n_dof; ++i)
    if (!fixed[i]) active.push_back(i);

  const auto n = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXcd Kr(n, n);
  Eigen::VectorXcd fr(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    fr[i] = load[active[i]];
    for (Eigen::Index j = 0; j < n; ++j) Kr(i, j) = K(active[i], active[j]);
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Kr);
  if (spec.material.eta == 0.0 && lu.rcond() < 1e-15)
    throw NumericalError("global dynamic stiffness singular at " +
                         std::to_string(waves.omega / (2.0 * M_PI)) + " Hz (undamped resonance)");
  const Eigen::VectorXcd xr = lu.solve(fr);

  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n_dof);
  for (Eigen::Index i = 0; i < n; ++i) x[active[i]] = xr[i];
  return x;
}

}  // namespace

void DispersionCurve::resize(Eigen::Index n) {
  const double nan = std::nan("");
  freq_hz = Eigen::VectorXd::Zero(n);
  k = Eigen::VectorXd::Constant(n, nan);
  v_group = Eigen::VectorXd::Constant(n, nan);
  spread = Eigen::VectorXd::Constant(n, nan);
  n_pairs = Eigen::VectorXi::Zero(n);
  flagged.assign(static_cast<std::size_t>(n), false);
}

std::string FrfDataset::bc_label() const {
  return std::string(to_string(bc_left)) + "-" + std::string(to_string(bc_right));
}

void FrfDataset::validate() const {
  if (freq_grid.size() == 0) throw ValidationError("FRF dataset has no frequencies");
  if (!(freq_grid[0] > 0.0)) throw ValidationError("FRF grid must start above 0");
  for (Eigen::Index i = 1; i < freq_grid.size(); ++i)
    if (!(freq_grid[i] > freq_grid[i - 1]))
      throw ValidationError("FRF grid must be strictly increasing");
  if (values.rows() != locations.size() || values.cols() != freq_grid.size())
    throw ValidationError("FRF values shape does not match grid and locations");
  if (!values.allFinite()) throw ValidationError("FRF values contain NaN or Inf");
}

FrfDataset FrfDataset::slice_hz(double f_lo_hz, double f_hi_hz) const {
  const double lo = 2.0 * M_PI * f_lo_hz;
  const double hi = 2.0 * M_PI * f_hi_hz;
  Eigen::Index first = 0;
  while (first < n_freq() && freq_grid[first] < lo * (1.0 - 1e-12)) ++first;
  Eigen::Index last = first;
  while (last < n_freq() && freq_grid[last] <= hi * (1.0 + 1e-12)) ++last;
  FrfDataset out = *this;
  out.freq_grid = freq_grid.segment(first, last - first);
  out.values = values.middleCols(first, last - first);
  return out;
}

Eigen::VectorXd uniform_grid_hz(double start_hz, double stop_hz, double step_hz) {
  if (!(start_hz > 0.0) || !(step_hz > 0.0) || !(stop_hz >= start_hz))
    throw ValidationError("frequency grid needs 0 < start <= stop and step > 0");
  const auto n = static_cast<Eigen::Index>(std::floor((stop_hz - start_hz) / step_hz + 1e-9)) + 1;
  Eigen::VectorXd grid(n);
  for (Eigen::Index i = 0; i < n; ++i) grid[i] = 2.0 * M_PI * (start_hz + step_hz * i);
  return grid;
}

FrfDataset synthesize_frfs(const WaveguideSpec& spec, const Eigen::VectorXd& freq_grid) {
  spec.validate();
  std::vector<double> raw{0.0, spec.length, spec.actuator_edges[0], spec.actuator_edges[1]};
  raw.insert(raw.end(), spec.sensor_positions.begin(), spec.sensor_positions.end());
  const std::vector<double> nodes = unique_sorted(raw);

  const bool flexural = spec.excitation_mode == ExcitationMode::Flexural;
  const Eigen::Index n_dof = 3 * static_cast<Eigen::Index>(nodes.size());
  Eigen::VectorXcd load = Eigen::VectorXcd::Zero(n_dof);
  const int load_dof = flexural ? 2 : 0;
  const double amplitude = flexural ? 0.5 * spec.section.height : 1.0;
  load[3 * node_index(nodes, spec.actuator_edges[0]) + load_dof] = -amplitude;
  load[3 * node_index(nodes, spec.actuator_edges[1]) + load_dof] = amplitude;

  const int out_dof = flexural ? 1 : 0;
  std::vector<Eigen::Index> sensor_dofs;
  for (double x : spec.sensor_positions) sensor_dofs.push_back(3 * node_index(nodes, x) + out_dof);

  FrfDataset data;
  data.freq_grid = freq_grid;
  data.locations = Eigen::Map<const Eigen::VectorXd>(spec.sensor_positions.data(),
                                                     static_cast<Eigen::Index>(spec.sensor_positions.size()));
  data.values.resize(data.locations.size(), freq_grid.size());
  data.excitation_mode = spec.excitation_mode;
  data.bc_left = spec.bc_left;
  data.bc_right = spec.bc_right;
  data.resolution_hz = freq_grid.size() > 1 ? (freq_grid[1] - freq_grid[0]) / (2.0 * M_PI) : 0.0;

  for (Eigen::Index j = 0; j < freq_grid.size(); ++j) {
    if (!(freq_grid[j] > 0.0)) throw ValidationError("synthesize_frfs: grid must exclude 0");
    const WavenumberSet waves = solve_wavenumbers(spec, freq_grid[j]);
    const Eigen::VectorXcd x = solve_global(spec, waves, nodes, load);
    for (std::size_t s = 0; s < sensor_dofs.size(); ++s) data.values(s, j) = x[sensor_dofs[s]];
  }
  data.validate();
  return data;
}

Eigen::VectorXcd nodal_response(const WaveguideSpec& spec, double omega,
                                const std::vector<double>& nodes,
                                const std::vector<PointLoad>& loads) {
  std::vector<double> raw = nodes;
  raw.push_back(0.0);
  raw.push_back(spec.length);
  for (const auto& l : loads) raw.push_back(l.x);
  const std::vector<double> mesh = unique_sorted(raw);
  if (mesh.size() != nodes.size())
    throw ValidationError("nodal_response: node list must include both ends and every load point");

  Eigen::VectorXcd load = Eigen::VectorXcd::Zero(3 * static_cast<Eigen::Index>(mesh.size()));
  for (const auto& l : loads) load[3 * node_index(mesh, l.x) + l.dof] += l.value;
  return solve_global(spec, solve_wavenumbers(spec, omega), mesh, load);
}

}  // namespace dispersim
