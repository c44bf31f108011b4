#include "dispersim/waveguide.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "dispersim/curve.hpp"
#include "dispersim/error.hpp"

namespace dispersim {

namespace {

constexpr cdouble kI{0.0, 1.0};

// Root of k^2 = z travelling or decaying toward +x.
cdouble forward_root(cdouble z) {
  cdouble k = std::sqrt(z);
  if (k.imag() > 0.0 || (k.imag() == 0.0 && k.real() < 0.0)) k = -k;
  return k;
}

struct SectionProps {
  cdouble EA, EI, GAK;  // complex when damped
  double rhoA, rhoI;
};

SectionProps section_props(const WaveguideSpec& spec) {
  const auto& m = spec.material;
  const cdouble loss{1.0, m.eta};
  const double A = spec.section.area();
  const double I = spec.section.second_moment();
  return {m.E * A * loss, m.E * I * loss, m.G * A * spec.kbar() * loss, m.rho * A, m.rho * I};
}

// phi / w ratio of a flexural wave with wavenumber k, taken from whichever row
// of the 2x2 characteristic system has the larger r3 coefficient.
cdouble flexural_scaling(const SectionProps& p, double omega, cdouble k) {
  const double w2 = omega * omega;
  const cdouble row1_coeff = -kI * p.GAK * k;
  const cdouble row2_coeff = p.EI * k * k - p.rhoI * w2 + p.GAK;
  if (std::abs(row2_coeff) >= std::abs(row1_coeff)) return -kI * p.GAK * k / row2_coeff;
  return -(p.GAK * k * k - p.rhoA * w2) / row1_coeff;
}

struct WaveBasis {
  std::array<cdouble, 6> k;
  std::array<cdouble, 6> r3;  // unused for the two axial waves
};

WaveBasis wave_basis(const WavenumberSet& w) {
  WaveBasis b;
  b.k = {w.k_long, -w.k_long, w.k_flex_prop, -w.k_flex_prop, w.k_flex_evan, -w.k_flex_evan};
  b.r3 = {0.0, 0.0, w.scaling[0], -w.scaling[0], w.scaling[1], -w.scaling[1]};
  return b;
}

// Fills psi and g for two nodes, with wave m evaluated as exp(-i k_m (x - ref_m)).
void fill_element(const SectionProps& p, const WaveBasis& b, std::array<double, 2> x,
                  const std::array<double, 6>& ref, Matrix6c& psi, Matrix6c& g) {
  psi.setZero();
  g.setZero();
  for (int node = 0; node < 2; ++node) {
    const int row = 3 * node;
    const double sign = node == 0 ? -1.0 : 1.0;  // left-end forces enter negated
    for (int m = 0; m < 6; ++m) {
      const cdouble k = b.k[m];
      const cdouble zeta = std::exp(-kI * k * (x[node] - ref[m]));
      if (m < 2) {
        psi(row, m) = zeta;
        g(row, m) = sign * p.EA * (-kI * k) * zeta;
      } else {
        const cdouble r3 = b.r3[m];
        psi(row + 1, m) = zeta;
        psi(row + 2, m) = r3 * zeta;
        g(row + 1, m) = sign * p.GAK * (-kI * k - r3) * zeta;
        g(row + 2, m) = sign * p.EI * r3 * (-kI * k) * zeta;
      }
    }
  }
}

Matrix6c stiffness_from(const Matrix6c& psi, const Matrix6c& g) {
  // K = G psi^{-1}  <=>  psi^T K^T = G^T
  const Matrix6c kt = psi.transpose().fullPivLu().solve(g.transpose());
  return kt.transpose();
}

}  // namespace

std::string_view to_string(BoundaryCondition bc) {
  switch (bc) {
    case BoundaryCondition::Free: return "free";
    case BoundaryCondition::Clamped: return "clamped";
    case BoundaryCondition::Pinned: return "pinned";
  }
  return "?";
}

std::string_view to_string(ExcitationMode mode) {
  return mode == ExcitationMode::Flexural ? "flexural" : "longitudinal";
}

std::string_view to_string(WaveMode mode) {
  switch (mode) {
    case WaveMode::Longitudinal: return "longitudinal";
    case WaveMode::FlexuralPropagating: return "flexural";
    case WaveMode::FlexuralEvanescent: return "flexural2";
  }
  return "?";
}

BoundaryCondition parse_boundary_condition(std::string_view text) {
  if (text == "free") return BoundaryCondition::Free;
  if (text == "clamped") return BoundaryCondition::Clamped;
  if (text == "pinned") return BoundaryCondition::Pinned;
  throw ValidationError("unknown boundary condition '" + std::string(text) +
                        "' (expected free, clamped or pinned)");
}

ExcitationMode parse_excitation_mode(std::string_view text) {
  if (text == "flexural") return ExcitationMode::Flexural;
  if (text == "longitudinal") return ExcitationMode::Longitudinal;
  throw ValidationError("unknown excitation mode '" + std::string(text) +
                        "' (expected flexural or longitudinal)");
}

WaveMode parse_wave_mode(std::string_view text) {
  if (text == "longitudinal") return WaveMode::Longitudinal;
  if (text == "flexural") return WaveMode::FlexuralPropagating;
  if (text == "flexural2") return WaveMode::FlexuralEvanescent;
  throw ValidationError("unknown wave mode '" + std::string(text) + "'");
}

void Material::validate() const {
  if (!(rho > 0.0)) throw ValidationError("material.rho must be > 0");
  if (!(E > 0.0)) throw ValidationError("material.E must be > 0");
  if (!(G > 0.0)) throw ValidationError("material.G must be > 0");
  if (!(eta >= 0.0 && eta < 0.1)) throw ValidationError("material.eta must be in [0, 0.1)");
  const double nu = poisson();
  if (!(nu > 0.0 && nu < 0.5))
    throw ValidationError("material Poisson ratio E/(2G)-1 = " + std::to_string(nu) +
                          " is outside (0, 0.5)");
}

double WaveguideSpec::kbar() const {
  return section.kbar > 0.0 ? section.kbar : compute_kbar(material);
}

void WaveguideSpec::validate() const {
  material.validate();
  if (!(section.width > 0.0) || !(section.height > 0.0))
    throw ValidationError("section width and height must be > 0");
  if (section.kbar < 0.0 || section.kbar > 1.0)
    throw ValidationError("section.kbar must be in (0, 1]");
  if (!(length > 0.0)) throw ValidationError("length must be > 0");
  if (!(actuator_edges[0] > 0.0 && actuator_edges[0] < actuator_edges[1]))
    throw ValidationError("actuator edges must satisfy 0 < left < right");
  if (sensor_positions.empty()) throw ValidationError("sensor list is empty");
  if (sensor_positions.front() < actuator_edges[1])
    throw ValidationError("sensors must lie at or beyond the actuator's right edge");
  if (sensor_positions.back() > length) throw ValidationError("sensor beyond beam length");
  for (std::size_t i = 1; i < sensor_positions.size(); ++i)
    if (!(sensor_positions[i] > sensor_positions[i - 1]))
      throw ValidationError("sensor positions must be strictly increasing");
}

WaveguideSpec reference_beam(ExcitationMode mode, BoundaryCondition left, BoundaryCondition right) {
  WaveguideSpec spec;
  spec.excitation_mode = mode;
  spec.bc_left = left;
  spec.bc_right = right;
  for (int i = 0; i < 23; ++i) spec.sensor_positions.push_back((19.0 + i) * kInch);
  return spec;
}

double rayleigh_speed_ratio(double poisson) {
  return (0.862 + 1.14 * poisson) / (1.0 + poisson);
}

double compute_kbar(const Material& material) {
  const double nu = material.poisson();
  if (!(nu > 0.0 && nu < 0.5))
    throw ValidationError("Poisson ratio " + std::to_string(nu) + " outside (0, 0.5)");
  const double ratio = rayleigh_speed_ratio(nu);
  return ratio * ratio;
}

double cutoff_frequency(const WaveguideSpec& spec) {
  const auto& m = spec.material;
  return std::sqrt(m.G * spec.section.area() * spec.kbar() / (m.rho * spec.section.second_moment()));
}

WavenumberSet solve_wavenumbers(const WaveguideSpec& spec, double omega) {
  if (!(omega > 0.0)) throw ValidationError("solve_wavenumbers: omega must be > 0");
  const SectionProps p = section_props(spec);
  const double w2 = omega * omega;

  WavenumberSet out;
  out.omega = omega;
  out.k_long = forward_root(p.rhoA * w2 / p.EA);

  // det = 0 is a quadratic in z = k^2.
  const cdouble a = p.EI * p.GAK;
  const cdouble b = -p.rhoI * w2 * p.GAK - p.rhoA * w2 * p.EI;
  const cdouble c = p.rhoA * w2 * (p.rhoI * w2 - p.GAK);
  const cdouble sd = std::sqrt(b * b - 4.0 * a * c);
  const cdouble plus = b + sd;
  const cdouble minus = b - sd;
  const cdouble q = -0.5 * (std::abs(plus) >= std::abs(minus) ? plus : minus);
  cdouble z1 = q / a;
  cdouble z2 = c / q;
  if (z2.real() > z1.real()) std::swap(z1, z2);

  out.k_flex_prop = forward_root(z1);
  out.k_flex_evan = forward_root(z2);
  out.scaling = {flexural_scaling(p, omega, out.k_flex_prop),
                 flexural_scaling(p, omega, out.k_flex_evan)};
  return out;
}

std::array<double, 3> characteristic_residuals(const WaveguideSpec& spec, const WavenumberSet& set) {
  const SectionProps p = section_props(spec);
  const double w2 = set.omega * set.omega;
  std::array<double, 3> out{};
  {
    const cdouble k2 = set.k_long * set.k_long;
    out[0] = std::abs(p.EA * k2 - p.rhoA * w2) / (std::abs(p.EA * k2) + p.rhoA * w2);
  }
  const std::array<cdouble, 2> ks{set.k_flex_prop, set.k_flex_evan};
  for (int i = 0; i < 2; ++i) {
    const cdouble k = ks[i];
    const cdouble m11 = p.GAK * k * k - p.rhoA * w2;
    const cdouble m12 = -kI * p.GAK * k;
    const cdouble m21 = kI * p.GAK * k;
    const cdouble m22 = p.EI * k * k - p.rhoI * w2 + p.GAK;
    const double scale = std::abs(m11) * std::abs(m22) + std::abs(m12) * std::abs(m21);
    out[1 + i] = std::abs(m11 * m22 - m12 * m21) / scale;
  }
  return out;
}

ElementMatrices element_matrices(const WaveguideSpec& spec, double omega,
                                 std::array<double, 2> node_coords) {
  if (!(node_coords[0] < node_coords[1]))
    throw ValidationError("element_matrices: node coordinates must be increasing");
  const WavenumberSet waves = solve_wavenumbers(spec, omega);
  const SectionProps p = section_props(spec);
  ElementMatrices out;
  fill_element(p, wave_basis(waves), node_coords, {0, 0, 0, 0, 0, 0}, out.psi, out.g);

  Eigen::JacobiSVD<Matrix6c> svd(out.psi);
  const auto& sv = svd.singularValues();
  out.psi_condition = sv(5) > 0.0 ? sv(0) / sv(5) : std::numeric_limits<double>::infinity();
  if (!(out.psi_condition <= 1e14))
    throw IllConditionedElement("shape-function matrix condition " +
                                    std::to_string(out.psi_condition) +
                                    " exceeds 1e14; element too long at this frequency",
                                out.psi_condition);
  out.stiffness = stiffness_from(out.psi, out.g);
  return out;
}

Matrix6c element_stiffness(const WaveguideSpec& spec, const WavenumberSet& waves, double length) {
  if (!(length > 0.0)) throw ValidationError("element_stiffness: length must be > 0");
  const SectionProps p = section_props(spec);
  Matrix6c psi, g;
  fill_element(p, wave_basis(waves), {0.0, length}, {0, length, 0, length, 0, length}, psi, g);
  return stiffness_from(psi, g);
}

Matrix6c element_stiffness(const WaveguideSpec& spec, double omega, double length) {
  return element_stiffness(spec, solve_wavenumbers(spec, omega), length);
}

DispersionCurve analytic_group_velocity(const WaveguideSpec& spec, WaveMode mode,
                                        const Eigen::VectorXd& omega_grid) {
  WaveguideSpec undamped = spec;
  undamped.material.eta = 0.0;

  auto pick = [mode](const WavenumberSet& w) {
    switch (mode) {
      case WaveMode::Longitudinal: return w.k_long;
      case WaveMode::FlexuralPropagating: return w.k_flex_prop;
      case WaveMode::FlexuralEvanescent: return w.k_flex_evan;
    }
    return w.k_long;
  };

  DispersionCurve curve;
  curve.resize(omega_grid.size());
  curve.freq_hz = omega_grid / (2.0 * M_PI);
  bool any = false;
  for (Eigen::Index i = 0; i < omega_grid.size(); ++i) {
    const double w = omega_grid[i];
    if (!(w > 0.0) || (i > 0 && !(w > omega_grid[i - 1])))
      throw ValidationError("analytic_group_velocity: grid must be positive and increasing");
    const cdouble k = pick(solve_wavenumbers(undamped, w));
    if (std::abs(k.imag()) > 1e-8 * std::abs(k)) continue;
    const double h = 1e-5 * w;
    const double kp = pick(solve_wavenumbers(undamped, w + h)).real();
    const double km = pick(solve_wavenumbers(undamped, w - h)).real();
    curve.k[i] = k.real();
    curve.v_group[i] = 2.0 * h / (kp - km);
    curve.spread[i] = 0.0;
    curve.n_pairs[i] = 1;
    any = true;
  }
  if (!any) throw NoPropagation("mode " + std::string(to_string(mode)) +
                                " does not propagate anywhere on the grid");
  return curve;
}

}  // namespace dispersim
