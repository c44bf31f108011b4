#pragma once

// Frequency-domain spectral element model of a uniform rod / Timoshenko beam.
//
// Conventions: harmonic time dependence e^{+iwt}, forward waves e^{-ikx}.
// Every returned wavenumber is the root whose wave travels or decays toward
// +x, i.e. Im(k) <= 0 and Re(k) >= 0 when Im(k) == 0. Nodal DOFs are ordered
// (u0, w0, phi) per node; phi is the cross-section rotation with shear strain
// w0' - phi.

#include <array>
#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace dispersim {

using cdouble = std::complex<double>;
using Matrix6c = Eigen::Matrix<cdouble, 6, 6>;

inline constexpr double kInch = 0.0254;

enum class BoundaryCondition { Free, Clamped, Pinned };
enum class ExcitationMode { Flexural, Longitudinal };
enum class WaveMode { Longitudinal, FlexuralPropagating, FlexuralEvanescent };

std::string_view to_string(BoundaryCondition bc);
std::string_view to_string(ExcitationMode mode);
std::string_view to_string(WaveMode mode);
BoundaryCondition parse_boundary_condition(std::string_view text);
ExcitationMode parse_excitation_mode(std::string_view text);
WaveMode parse_wave_mode(std::string_view text);

struct Material {
  double rho = 2700.0;  ///< kg/m^3
  double E = 69e9;      ///< Pa
  double G = 26e9;      ///< Pa
  double eta = 0.01;    ///< hysteretic loss factor

  double poisson() const { return E / (2.0 * G) - 1.0; }
  /// Throws ValidationError when an invariant is violated.
  void validate() const;
};

struct CrossSection {
  double width = 1.0 * kInch;
  double height = 0.125 * kInch;
  double kbar = 0.0;  ///< 0 means "derive from the material"

  double area() const { return width * height; }
  double second_moment() const { return width * height * height * height / 12.0; }
};

struct WaveguideSpec {
  Material material;
  CrossSection section;
  double length = 48.0 * kInch;
  BoundaryCondition bc_left = BoundaryCondition::Free;
  BoundaryCondition bc_right = BoundaryCondition::Free;
  std::array<double, 2> actuator_edges{18.5 * kInch, 19.0 * kInch};
  std::vector<double> sensor_positions;
  ExcitationMode excitation_mode = ExcitationMode::Flexural;

  /// K-bar actually used: the section's explicit value, or the Rayleigh-matched one.
  double kbar() const;
  void validate() const;
};

/// The 48 in aluminium beam with a 1 x 1/8 in section, actuator pair at
/// 18.5-19 in and 23 sensors at 1 in pitch starting at the actuator's right edge.
WaveguideSpec reference_beam(ExcitationMode mode = ExcitationMode::Flexural,
                             BoundaryCondition left = BoundaryCondition::Free,
                             BoundaryCondition right = BoundaryCondition::Free);

/// Viktorov approximation of the Rayleigh wave speed ratio c_R / c_s.
double rayleigh_speed_ratio(double poisson);

/// Timoshenko shear factor from matching the high-frequency shear speed to the
/// Rayleigh speed: (c_R / c_s)^2.
double compute_kbar(const Material& material);

/// Shear cut-off of the second flexural branch, sqrt(G A Kbar / (rho I)) in rad/s.
double cutoff_frequency(const WaveguideSpec& spec);

struct WavenumberSet {
  double omega = 0.0;
  cdouble k_long;
  cdouble k_flex_prop;
  cdouble k_flex_evan;
  /// phi / w amplitude ratio for the propagating and evanescent flexural waves.
  std::array<cdouble, 2> scaling;
};

WavenumberSet solve_wavenumbers(const WaveguideSpec& spec, double omega);

/// Normalised residuals of the characteristic equations for each wavenumber in
/// `set` (longitudinal, flexural propagating, flexural evanescent).
std::array<double, 3> characteristic_residuals(const WaveguideSpec& spec, const WavenumberSet& set);

struct ElementMatrices {
  Matrix6c psi;        ///< shape-function matrix, d = psi * amplitudes
  Matrix6c g;          ///< boundary-force matrix, F = g * amplitudes
  Matrix6c stiffness;  ///< element dynamic stiffness, F = K d
  double psi_condition = 0.0;
};

/// Element matrices with every wave referenced to the global origin,
/// zeta = exp(-i k x_j). Throws IllConditionedElement when cond(psi) > 1e14,
/// which happens once evanescent waves span many decay lengths.
ElementMatrices element_matrices(const WaveguideSpec& spec, double omega,
                                 std::array<double, 2> node_coords);

/// Element dynamic stiffness in the node-referenced wave basis (forward waves
/// referenced at the left node, backward waves at the right node). Identical
/// to element_matrices().stiffness but well conditioned for any length.
Matrix6c element_stiffness(const WaveguideSpec& spec, double omega, double length);
Matrix6c element_stiffness(const WaveguideSpec& spec, const WavenumberSet& waves, double length);

struct DispersionCurve;

/// Ground-truth group velocity d(omega)/d(Re k) of one wave mode, evaluated
/// with the damping switched off. Bins where the mode does not propagate are
/// marked invalid; throws NoPropagation if no bin propagates.
DispersionCurve analytic_group_velocity(const WaveguideSpec& spec, WaveMode mode,
                                        const Eigen::VectorXd& omega_grid);

}  // namespace dispersim
