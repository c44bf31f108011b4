#include <cmath>
#include <limits>

#include <doctest.h>

#include "dispersim/dispersion.hpp"
#include "dispersim/error.hpp"

using namespace dispersim;

namespace {

constexpr double kFs = 1e6;
constexpr Eigen::Index kBins = 8193;

// Gaussian-windowed spectrum around fc, propagated over x with k(omega).
template <class K>
Eigen::VectorXcd propagated(double fc, double x, K k) {
  Eigen::VectorXcd u(kBins);
  const double dw = 2.0 * M_PI * kFs / (2.0 * (kBins - 1));
  for (Eigen::Index i = 0; i < kBins; ++i) {
    const double w = i * dw;
    const double g = std::exp(-std::pow((w - 2.0 * M_PI * fc) / (2.0 * M_PI * 0.3 * fc), 2));
    u[i] = g * std::exp(cdouble(0.0, -k(w) * x));
  }
  return u;
}

}  // namespace

TEST_CASE("median ignores non-finite values and outliers") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK(median({1.0, 2.0, nan, 100.0}) == 2.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(std::isnan(median({nan})));
}

TEST_CASE("a non-dispersive pair gives its wavenumber and speed") {
  const double c = 5000.0, xi = 0.50, xj = 0.53;
  auto k = [&](double w) { return w / c; };
  const PairEstimate e = pair_wavenumber(propagated(20e3, xi, k), propagated(20e3, xj, k), kFs, xi, xj,
                                         2.0 * M_PI * 20e3, (xj - xi) / c);
  REQUIRE(e.n_valid() > 10);
  for (Eigen::Index i = 0; i < e.k.size(); ++i)
    if (e.valid[i]) CHECK(e.k[i] == doctest::Approx(k(e.omega[i])).epsilon(1e-9));
  const PairVelocity v = pair_group_velocity(e);
  int n = 0;
  for (Eigen::Index i = 0; i < v.v_group.size(); ++i)
    if (std::isfinite(v.v_group[i])) {
      CHECK(v.v_group[i] == doctest::Approx(c).epsilon(1e-6));
      ++n;
    }
  CHECK(n > 5);
}

TEST_CASE("pair order does not matter") {
  auto k = [](double w) { return 0.02 * std::sqrt(w); };
  const Eigen::VectorXcd a = propagated(15e3, 0.5, k), b = propagated(15e3, 0.6, k);
  const double w = 2.0 * M_PI * 15e3;
  const PairEstimate ab = pair_wavenumber(a, b, kFs, 0.5, 0.6, w, 1e-4);
  const PairEstimate ba = pair_wavenumber(b, a, kFs, 0.6, 0.5, w, -1e-4);
  CHECK(ab.dx() == doctest::Approx(0.1));
  CHECK(ba.dx() == doctest::Approx(0.1));
  for (Eigen::Index i = 0; i < ab.k.size(); ++i)
    if (ab.valid[i]) CHECK(ab.k[i] == ba.k[i]);
}

TEST_CASE("wrapped phase is placed on the anchored branch") {
  // k dx is several times 2 pi, so only the anchor picks the right branch.
  const double xi = 0.0, xj = 0.2;
  auto k = [](double w) { return 0.2 * std::sqrt(w); };
  const double w = 2.0 * M_PI * 20e3;
  PairOptions o;
  o.anchor = std::make_pair(w, k(w));
  const PairEstimate e = pair_wavenumber(propagated(20e3, xi, k), propagated(20e3, xj, k), kFs, xi, xj, w, 0.0, o);
  CHECK(k(w) * (xj - xi) > 4.0 * M_PI);
  for (Eigen::Index i = 0; i < e.k.size(); ++i)
    if (e.valid[i]) CHECK(e.k[i] == doctest::Approx(k(e.omega[i])).epsilon(1e-9));
}

TEST_CASE("pairs sharing a sensor give consistent wavenumbers") {
  auto k = [](double w) { return 0.05 * std::sqrt(w); };
  const double w = 2.0 * M_PI * 25e3;
  PairOptions o;
  o.anchor = std::make_pair(w, k(w));
  const Eigen::VectorXcd a = propagated(25e3, 0.50, k), b = propagated(25e3, 0.52, k), c = propagated(25e3, 0.56, k);
  const PairEstimate ab = pair_wavenumber(a, b, kFs, 0.50, 0.52, w, 0.0, o);
  const PairEstimate ac = pair_wavenumber(a, c, kFs, 0.50, 0.56, w, 0.0, o);
  for (Eigen::Index i = 0; i < ab.k.size(); ++i)
    if (ab.valid[i] && ac.valid[i]) CHECK(ab.k[i] == doctest::Approx(ac.k[i]).epsilon(1e-9));
}

TEST_CASE("a pair without a common band is unreliable") {
  auto k = [](double w) { return w / 5000.0; };
  CHECK_THROWS_AS(pair_wavenumber(propagated(10e3, 0.0, k), propagated(200e3, 0.1, k), kFs, 0.0, 0.1,
                                  2.0 * M_PI * 10e3, 2e-5),
                  UnreliablePair);
}

TEST_CASE("comparison with an oracle") {
  DispersionCurve curve, oracle;
  curve.resize(3);
  oracle.resize(2);
  curve.freq_hz << 1000.0, 2000.0, 3000.0;
  curve.v_group << 101.0, 198.0, 1e9;
  curve.n_pairs << 5, 5, 0;
  oracle.freq_hz << 0.0, 4000.0;
  oracle.v_group << 0.0, 400.0;
  oracle.n_pairs << 1, 1;
  const ComparisonReport r = compare_to_oracle(curve, oracle, 500.0, 3500.0);
  CHECK(r.n_bins == 2);
  CHECK(r.max == doctest::Approx(0.01));
  CHECK(r.median == doctest::Approx(0.01));
  CHECK_THROWS_AS(compare_to_oracle(curve, oracle, 5000.0, 6000.0), NoOverlap);
}
