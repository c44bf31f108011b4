#pragma once

#include <string>

#include <Eigen/Core>

#include "dispersim/waveguide.hpp"

namespace dispersim {

/// Receptance samples for one drive and many response locations.
struct FrfDataset {
  Eigen::VectorXd freq_grid;  ///< rad/s, strictly increasing, > 0
  Eigen::VectorXd locations;  ///< m
  Eigen::MatrixXcd values;    ///< [n_locations x n_freq], m/N
  ExcitationMode excitation_mode = ExcitationMode::Flexural;
  BoundaryCondition bc_left = BoundaryCondition::Free;
  BoundaryCondition bc_right = BoundaryCondition::Free;
  double resolution_hz = 0.0;

  Eigen::Index n_freq() const { return freq_grid.size(); }
  Eigen::Index n_channels() const { return values.rows(); }
  std::string bc_label() const;
  void validate() const;

  /// Samples with f_lo_hz <= f <= f_hi_hz.
  FrfDataset slice_hz(double f_lo_hz, double f_hi_hz) const;
};

/// Uniform grid start_hz, start_hz + step_hz, ... <= stop_hz, in rad/s.
Eigen::VectorXd uniform_grid_hz(double start_hz, double stop_hz, double step_hz);

/// Exact receptances of `spec` at every sensor position, one element between
/// each pair of consecutive nodes in {0, actuator edges, sensors, length}.
FrfDataset synthesize_frfs(const WaveguideSpec& spec, const Eigen::VectorXd& freq_grid);

/// Full nodal response (3 DOF per node) for an arbitrary node set and a single
/// unit load. Used for reciprocity and mesh checks.
struct PointLoad {
  double x = 0.0;
  int dof = 1;  ///< 0 axial force, 1 transverse force, 2 moment
  cdouble value{1.0, 0.0};
};
Eigen::VectorXcd nodal_response(const WaveguideSpec& spec, double omega,
                                const std::vector<double>& nodes,
                                const std::vector<PointLoad>& loads);

}  // namespace dispersim
