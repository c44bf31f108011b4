#include <cmath>

#include <doctest.h>

#include "dispersim/error.hpp"
#include "dispersim/transient.hpp"

using namespace dispersim;

namespace {

RationalModel two_mode_model() {
  RationalModel m;
  m.poles = PoleSet::from_representatives({{-800.0, 2.0 * M_PI * 8e3}, {-1500.0, 2.0 * M_PI * 21e3}});
  m.residues.resize(1, 4);
  m.residues << cdouble(0.0, -3.0), cdouble(0.0, 3.0), cdouble(1.0, -2.0), cdouble(1.0, 2.0);
  realize(m);
  return m;
}

}  // namespace

TEST_CASE("tone burst shape") {
  const ToneBurst b = make_tone_burst(10e3, 3, 1e6);
  CHECK(b.samples.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
  CHECK(b.duration() == doctest::Approx(3e-4));
  CHECK(burst_envelope(b, -1e-6) == 0.0);
  CHECK(burst_envelope(b, 1.5e-4) == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_tone_burst(10e3, 3, 1.5e5), ValidationError);
}

TEST_CASE("envelope of a slowly modulated tone is its modulation") {
  const Eigen::Index n = 4096;
  Eigen::VectorXd x(n), g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g[i] = 2.5 * std::exp(-std::pow((i - 2048.0) / 400.0, 2));
    x[i] = g[i] * std::cos(2.0 * M_PI * 64.0 * i / n);
  }
  const Eigen::VectorXd e = envelope(x);
  CHECK((e - g).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("simulation is linear in the model and zero for zero input") {
  RationalModel m = two_mode_model();
  const ToneBurst b = make_tone_burst(8e3, 2);
  SimulateOptions o;
  o.remove_wraparound = true;
  const TransientRecord r1 = simulate(m, b, 2e-3, o);
  RationalModel m2 = m;
  m2.residues *= 2.0;
  realize(m2);
  const TransientRecord r2 = simulate(m2, b, 2e-3, o);
  CHECK((r2.channels - 2.0 * r1.channels).norm() < 1e-12 * r1.channels.norm());

  ToneBurst silent = b;
  silent.samples.setZero();
  CHECK(simulate(m, silent, 2e-3, o).channels.norm() == 0.0);
}

TEST_CASE("analytic wraparound removal matches heavy zero padding") {
  const RationalModel m = two_mode_model();
  const ToneBurst b = make_tone_burst(8e3, 2);
  SimulateOptions corrected;
  corrected.remove_wraparound = true;
  SimulateOptions padded;
  padded.min_padded = 1 << 18;
  const TransientRecord a = simulate(m, b, 2e-3, corrected);
  const TransientRecord c = simulate(m, b, 2e-3, padded);
  CHECK((a.channels - c.channels).norm() < 1e-9 * c.channels.norm());
}

TEST_CASE("the response starts with the burst and is time invariant") {
  const RationalModel m = two_mode_model();
  const ToneBurst b = make_tone_burst(8e3, 2);
  ToneBurst late = b;
  const Eigen::Index shift = 300;
  late.samples = Eigen::VectorXd::Zero(b.n_samples() + shift);
  late.samples.tail(b.n_samples()) = b.samples;
  SimulateOptions o;
  o.remove_wraparound = true;
  const TransientRecord r = simulate(m, b, 2e-3, o);
  const TransientRecord rl = simulate(m, late, 2e-3, o);
  const Eigen::Index n = r.n_samples() - shift;
  const double scale = r.channels.cwiseAbs().maxCoeff();
  CHECK(rl.channels.leftCols(shift).cwiseAbs().maxCoeff() < 1e-3 * scale);
  CHECK((rl.channels.rightCols(n) - r.channels.leftCols(n)).cwiseAbs().maxCoeff() < 1e-3 * scale);
}

TEST_CASE("unstable models are refused") {
  RationalModel m = two_mode_model();
  m.poles = PoleSet::from_representatives({{10.0, 1e4}, {-1.0, 2e4}});
  realize(m);
  CHECK_THROWS_AS(simulate(m, make_tone_burst(8e3, 2), 1e-3), UnstableModel);
}

TEST_CASE("incident extraction keeps the first arrival and suppresses a later echo") {
  const ToneBurst b = make_tone_burst(20e3, 2);
  TransientRecord r;
  r.excitation = b;
  const Eigen::Index n = 3000;
  r.time.resize(n);
  r.channels = Eigen::MatrixXd::Zero(1, n);
  for (Eigen::Index i = 0; i < n; ++i) r.time[i] = (i + 0.5) / b.sample_rate;
  const Eigen::Index first = 400, echo = 1800;
  for (Eigen::Index i = 0; i < b.n_samples(); ++i) {
    r.channels(0, first + i) += b.samples[i];
    r.channels(0, echo + i) += 0.8 * b.samples[i];
  }
  const ProcessedWaveform wf = extract_incident(r, 0);
  CHECK(wf.t_peak == doctest::Approx(r.time[first] + 0.5 * b.duration()).epsilon(0.02));
  CHECK(wf.t_lo < wf.t_peak);
  CHECK(wf.t_hi > wf.t_peak);
  CHECK(wf.samples.segment(echo, b.n_samples()).cwiseAbs().maxCoeff() < 1e-3);
  CHECK(wf.samples.segment(first, b.n_samples()).cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(0.05));

  r.channels.setZero();
  CHECK_THROWS_AS(extract_incident(r, 0), NoArrival);
}
