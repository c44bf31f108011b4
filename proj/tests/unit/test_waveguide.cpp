#include <cmath>

#include <doctest.h>

#include "dispersim/curve.hpp"
#include "dispersim/dataset.hpp"
#include "dispersim/error.hpp"
#include "dispersim/waveguide.hpp"

using namespace dispersim;

namespace {

WaveguideSpec undamped() {
  WaveguideSpec s = reference_beam();
  s.material.eta = 0.0;
  return s;
}

}  // namespace

TEST_CASE("wavenumbers satisfy their characteristic equations") {
  const WaveguideSpec spec = reference_beam();
  for (double f : {10.0, 1e3, 2e4, 5e4, 3e5}) {
    const WavenumberSet w = solve_wavenumbers(spec, 2.0 * M_PI * f);
    for (double r : characteristic_residuals(spec, w)) CHECK(r < 1e-10);
    CHECK(w.k_long.imag() <= 0.0);
    CHECK(w.k_flex_prop.imag() <= 0.0);
    CHECK(w.k_flex_evan.imag() <= 0.0);
  }
}

TEST_CASE("low-frequency flexural wavenumber tends to the Euler-Bernoulli value") {
  const WaveguideSpec spec = undamped();
  const double omega = 2.0 * M_PI * 2.0;
  const double rho_a = spec.material.rho * spec.section.area();
  const double ei = spec.material.E * spec.section.second_moment();
  const double k_eb = std::pow(omega * omega * rho_a / ei, 0.25);
  const WavenumberSet w = solve_wavenumbers(spec, omega);
  CHECK(std::abs(w.k_flex_prop.real() - k_eb) / k_eb < 1e-5);
  CHECK(std::abs(w.k_flex_evan.imag() + k_eb) / k_eb < 1e-5);
}

TEST_CASE("longitudinal wavenumber is omega over the bar speed") {
  const WaveguideSpec spec = undamped();
  const double omega = 2.0 * M_PI * 1e4;
  const double c = std::sqrt(spec.material.E / spec.material.rho);
  CHECK(solve_wavenumbers(spec, omega).k_long.real() == doctest::Approx(omega / c).epsilon(1e-12));
}

TEST_CASE("shear factor follows the exact Rayleigh speed") {
  const WaveguideSpec spec = reference_beam();
  const Material& m = spec.material;
  const double nu = m.E / (2.0 * m.G) - 1.0;
  // Root of the Rayleigh secular equation in xi = c_R / c_s.
  const double kappa = (1.0 - 2.0 * nu) / (2.0 * (1.0 - nu));
  auto secular = [&](double xi) {
    const double x2 = xi * xi;
    return (2.0 - x2) * (2.0 - x2) - 4.0 * std::sqrt(1.0 - x2) * std::sqrt(1.0 - kappa * x2);
  };
  double a = 0.5, b = 0.999;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (a + b);
    (secular(a) * secular(mid) <= 0.0 ? b : a) = mid;
  }
  const double exact = 0.5 * (a + b);
  CHECK(std::abs(rayleigh_speed_ratio(nu) - exact) / exact < 5e-3);
  CHECK(compute_kbar(m) == doctest::Approx(0.866).epsilon(1e-3));
  const double ratio = rayleigh_speed_ratio(nu);
  CHECK(compute_kbar(m) == doctest::Approx(ratio * ratio).epsilon(1e-14));
  const double h = spec.section.height;
  const double expected = std::sqrt(12.0 * m.G * ratio * ratio / (m.rho * h * h));
  CHECK(cutoff_frequency(spec) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("node-referenced stiffness matches the origin-referenced one for short elements") {
  const WaveguideSpec spec = reference_beam();
  const double omega = 2.0 * M_PI * 5e3;
  const ElementMatrices em = element_matrices(spec, omega, {0.1, 0.125});
  const Matrix6c k = element_stiffness(spec, omega, 0.025);
  CHECK((em.stiffness - k).norm() / k.norm() < 1e-8);
}

TEST_CASE("receptances are reciprocal") {
  WaveguideSpec spec = reference_beam();
  spec.bc_left = BoundaryCondition::Clamped;
  const std::vector<double> nodes{0.0, 0.2, 0.55, spec.length};
  const double omega = 2.0 * M_PI * 3.7e3;
  const Eigen::VectorXcd a = nodal_response(spec, omega, nodes, {{0.2, 1}});
  const Eigen::VectorXcd b = nodal_response(spec, omega, nodes, {{0.55, 1}});
  CHECK(std::abs(a[3 * 2 + 1] - b[3 * 1 + 1]) < 1e-10 * std::abs(a[3 * 2 + 1]));
}

TEST_CASE("extra nodes do not change the response") {
  const WaveguideSpec spec = reference_beam();
  const double omega = 2.0 * M_PI * 12e3;
  const Eigen::VectorXcd coarse = nodal_response(spec, omega, {0.0, 0.3, spec.length}, {{0.3, 1}});
  const Eigen::VectorXcd fine = nodal_response(spec, omega, {0.0, 0.1, 0.3, 0.9, spec.length}, {{0.3, 1}});
  CHECK(std::abs(coarse[4] - fine[7]) < 1e-10 * std::abs(coarse[4]));
}

TEST_CASE("flexural group velocity tends to twice the phase velocity at low frequency") {
  const WaveguideSpec spec = undamped();
  Eigen::VectorXd omega(1);
  omega << 2.0 * M_PI * 5.0;
  const DispersionCurve c = analytic_group_velocity(spec, WaveMode::FlexuralPropagating, omega);
  const double k = solve_wavenumbers(spec, omega[0]).k_flex_prop.real();
  CHECK(c.v_group[0] == doctest::Approx(2.0 * omega[0] / k).epsilon(1e-4));
}

TEST_CASE("invalid materials are rejected") {
  WaveguideSpec spec = reference_beam();
  spec.material.rho = -1.0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = reference_beam();
  spec.sensor_positions.clear();
  CHECK_THROWS_AS(spec.validate(), ValidationError);
}
