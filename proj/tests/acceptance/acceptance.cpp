// Acceptance gate: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset. Exit status is 0 only if every selected
// criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dispersim/dispersion.hpp"
#include "dispersim/error.hpp"
#include "dispersim/pipeline.hpp"
#include "dispersim/waveguide.hpp"

using namespace dispersim;

namespace {

using Clock = std::chrono::steady_clock;

// Tolerances.
constexpr double kRecoveryError = 1e-8;
constexpr double kRecoveryPole = 1e-6;
constexpr double kRecoverySeconds = 30.0;
constexpr double kFitError = 1e-5;
constexpr int kFlexPoles = 212;
constexpr int kFlexPoleTolerance = 4;
constexpr double kFitSeconds = 600.0;
constexpr int kLongPoles = 48;
constexpr int kLongPeaks = 24;
constexpr double kFlexMedian = 0.02;
constexpr double kFlexMax = 0.05;
constexpr double kSweepSeconds = 300.0;
constexpr double kLongDeviation = 0.01;
constexpr double kBcMedian = 0.01;
constexpr double kBcFrfRatio = 10.0;
constexpr double kResidual = 1e-10;
constexpr double kSemSeconds = 60.0;
constexpr double kWavenumber = 1e-3;
constexpr double kCompareLo = 2000.0;
constexpr double kCompareHi = 40000.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string f(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

// Models fitted once and shared between criteria.
struct Shared {
  ScenarioConfig config;
  std::optional<FrfDataset> flex_ff_frf;
  std::optional<ModelArtifact> flex_ff;
  double flex_ff_seconds = 0.0;

  const ModelArtifact& flexural_free_free() {
    if (!flex_ff) {
      const auto t0 = Clock::now();
      flex_ff_frf = synthesize(config, ExcitationMode::Flexural);
      flex_ff = fit_dataset(*flex_ff_frf, config);
      flex_ff_seconds = seconds_since(t0);
    }
    return *flex_ff;
  }
};

// 1. Random stable SIMO systems are recovered exactly.
Outcome vf_exact_recovery() {
  std::mt19937_64 rng(20240607);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto t0 = Clock::now();
  double worst_err = 0.0, worst_pole = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int pairs = 2 + static_cast<int>(unit(rng) * 9.0);  // r = 4 .. 20
    std::vector<double> fn;
    while (static_cast<int>(fn.size()) < pairs) {
      const double cand = 200.0 * std::pow(40.0, unit(rng));  // 200 Hz .. 8 kHz
      bool spaced = true;
      for (double g : fn) spaced = spaced && std::abs(std::log(cand / g)) > 0.08;
      if (spaced) fn.push_back(cand);
    }
    std::vector<cdouble> reps;
    for (double fr : fn) {
      const double w = 2.0 * M_PI * fr;
      reps.emplace_back(-0.01 * w, w * std::sqrt(1.0 - 1e-4));
    }
    RationalModel truth;
    truth.poles = PoleSet::from_representatives(reps);
    truth.residues.resize(3, truth.poles.size());
    for (Eigen::Index j = 0; j < truth.poles.size(); ++j) {
      if (!truth.poles.is_pair_start(j)) continue;
      for (int c = 0; c < 3; ++c) {
        const cdouble r(gauss(rng), gauss(rng));
        truth.residues(c, j) = r * std::abs(truth.poles[j]);
        truth.residues(c, j + 1) = std::conj(truth.residues(c, j));
      }
    }
    FrfDataset frf;
    const Eigen::Index n = 4000;
    frf.freq_grid.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
      frf.freq_grid[i] = 2.0 * M_PI * 100.0 * std::pow(200.0, static_cast<double>(i) / (n - 1));
    frf.locations = Eigen::Vector3d(0.1, 0.2, 0.3);
    frf.values = truth.evaluate_grid(frf.freq_grid);
    BandPlan plan{{{100.0, 20000.0, 2 * pairs}}};
    double err = 1.0, pole_dev = 1.0;
    try {
      const FitResult fit = fit_full(frf, plan);
      err = fit.report.rel_error;
      pole_dev = 0.0;
      if (fit.model.order() != truth.order()) {
        pole_dev = 1.0;
      } else {
        for (Eigen::Index j = 0; j < truth.order(); ++j) {
          double best = 1e300;
          for (Eigen::Index k = 0; k < fit.model.order(); ++k)
            best = std::min(best, std::abs(fit.model.poles[k] - truth.poles[j]) / std::abs(truth.poles[j]));
          pole_dev = std::max(pole_dev, best);
        }
      }
    } catch (const std::exception& e) {
      std::printf("    trial %d threw: %s\n", trial, e.what());
    }
    worst_err = std::max(worst_err, err);
    worst_pole = std::max(worst_pole, pole_dev);
    if (!(err < kRecoveryError && pole_dev < kRecoveryPole)) ++failures;
  }
  const double t = seconds_since(t0);
  return {failures == 0 && t < kRecoverySeconds,
          f("20 systems, %g failed; worst E_rel %.2e (< 1e-8), worst pole dev %.2e (< 1e-6), %.1f s (< 30 s)",
            failures, worst_err, worst_pole, t)};
}

// 2. Reference flexural fit at desk scale.
Outcome flexural_fit(Shared& shared) {
  const ModelArtifact& m = shared.flexural_free_free();
  bool bands_ok = true;
  double worst_band = 0.0;
  for (const BandFit& b : m.report.bands) {
    worst_band = std::max(worst_band, b.rel_error);
    bands_ok = bands_ok && b.rel_error <= kFitError;
  }
  const auto order = static_cast<double>(m.model.order());
  const bool pass = std::abs(order - kFlexPoles) <= kFlexPoleTolerance && m.report.rel_error <= kFitError &&
                    bands_ok && shared.flex_ff_seconds < kFitSeconds;
  return {pass, f("%g poles (212 +- 4), E_rel %.2e (<= 1e-5), worst band %.2e (<= 1e-5), %.0f s (< 600 s)", order,
                  m.report.rel_error, worst_band, shared.flex_ff_seconds)};
}

// 3. In-plane model order and peak count.
Outcome longitudinal_fit(Shared& shared) {
  const FrfDataset frf = synthesize(shared.config, ExcitationMode::Longitudinal);
  const auto peaks = static_cast<double>(detect_peaks(frf, shared.config.vf.peaks).size());
  const ModelArtifact m = fit_dataset(frf, shared.config);
  const auto order = static_cast<double>(m.model.order());
  const bool pass = order == kLongPoles && m.report.rel_error <= kFitError && std::abs(peaks - kLongPeaks) <= 1;
  return {pass, f("%g poles (== 48), E_rel %.2e (<= 1e-5), %g peaks (24 +- 1)", order, m.report.rel_error, peaks)};
}

// 4. Flexural group velocity against the Timoshenko oracle.
Outcome flexural_dispersion(Shared& shared) {
  const ModelArtifact& m = shared.flexural_free_free();
  const auto t0 = Clock::now();
  const DispersionCurve curve = estimate_dispersion(m, shared.config);
  const double t = seconds_since(t0);
  const DispersionCurve oracle =
      analytic_group_velocity(shared.config.spec(ExcitationMode::Flexural), WaveMode::FlexuralPropagating,
                              2.0 * M_PI * curve.freq_hz);
  const ComparisonReport rep = compare_to_oracle(curve, oracle, kCompareLo, kCompareHi);
  bool flagged = true;
  for (Eigen::Index i = 0; i < curve.size(); ++i)
    if (curve.valid(i) && curve.freq_hz[i] > 45000.0) flagged = flagged && curve.flagged[static_cast<std::size_t>(i)];
  const bool pass = rep.median <= kFlexMedian && rep.max <= kFlexMax && flagged && t < kSweepSeconds;
  return {pass, f("median %.4f (<= 0.02), max %.4f (<= 0.05) over %g bins, >45 kHz flagged %g", rep.median,
                  rep.max, static_cast<double>(rep.n_bins), flagged ? 1.0 : 0.0) +
                    f(", %.0f s (< 300 s)", t)};
}

// 5. In-plane group velocity against sqrt(E / rho).
Outcome longitudinal_dispersion(Shared& shared) {
  const FrfDataset frf = synthesize(shared.config, ExcitationMode::Longitudinal);
  const ModelArtifact m = fit_dataset(frf, shared.config);
  const DispersionCurve curve = estimate_dispersion(m, shared.config);
  const Material& mat = shared.config.beam.material;
  const double c0 = std::sqrt(mat.E / mat.rho);
  double worst = 0.0;
  int bins = 0;
  for (Eigen::Index i = 0; i < curve.size(); ++i) {
    if (!curve.valid(i) || curve.freq_hz[i] < kCompareLo || curve.freq_hz[i] > kCompareHi) continue;
    worst = std::max(worst, std::abs(curve.v_group[i] - c0) / c0);
    ++bins;
  }
  return {bins > 0 && worst <= kLongDeviation,
          f("c0 = %.1f m/s, max deviation %.4f (<= 0.01) over %g bins", c0, worst, bins)};
}

// 6. Boundary conditions change the FRFs but not the curves.
Outcome bc_invariance(Shared& shared) {
  shared.flexural_free_free();
  std::vector<DispersionCurve> curves{estimate_dispersion(*shared.flex_ff, shared.config)};
  std::vector<FrfDataset> frfs{*shared.flex_ff_frf};
  for (auto [left, right] : {std::pair{BoundaryCondition::Clamped, BoundaryCondition::Free},
                             std::pair{BoundaryCondition::Pinned, BoundaryCondition::Pinned}}) {
    ScenarioConfig c = shared.config;
    c.beam.bc_left = left;
    c.beam.bc_right = right;
    frfs.push_back(synthesize(c, ExcitationMode::Flexural));
    curves.push_back(estimate_dispersion(fit_dataset(frfs.back(), c), c));
  }
  const char* names[] = {"ff", "cf", "pp"};
  bool pass = true;
  std::string detail;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const ComparisonReport rep = compare_to_oracle(curves[a], curves[b], kCompareLo, kCompareHi);
      const double frf_diff = (frfs[a].values - frfs[b].values).norm() / frfs[b].values.norm();
      pass = pass && rep.median <= kBcMedian && frf_diff > kBcFrfRatio * rep.median;
      detail += std::string(detail.empty() ? "" : "; ") + names[a] + "/" + names[b] +
                f(" median %.4f, FRF diff %.2f", rep.median, frf_diff);
    }
  return {pass, detail + " (median <= 0.01, FRF diff > 10x median)"};
}

// 7. Spectral element model self-checks.
Outcome sem_checks(Shared& shared) {
  const auto t0 = Clock::now();
  const WaveguideSpec spec = shared.config.spec(ExcitationMode::Flexural);
  double worst_residual = 0.0;
  for (double fr = 10.0; fr <= 1e6; fr *= 1.37) {
    const auto r = characteristic_residuals(spec, solve_wavenumbers(spec, 2.0 * M_PI * fr));
    worst_residual = std::max({worst_residual, r[0], r[1], r[2]});
  }
  const Material& m = spec.material;
  const double nu = m.E / (2.0 * m.G) - 1.0;
  const double ratio = (0.862 + 1.14 * nu) / (1.0 + nu);
  const double a = spec.section.width * spec.section.height;
  const double i = spec.section.width * std::pow(spec.section.height, 3) / 12.0;
  const double wc = std::sqrt(m.G * a * ratio * ratio / (m.rho * i));
  const double cutoff_dev = std::abs(cutoff_frequency(spec) - wc) / wc;

  // Reciprocity: transverse force at x_a -> w(x_b) equals force at x_b -> w(x_a).
  const std::vector<double> nodes{0.0, 0.3, 0.55, 0.9, spec.length};
  double recip = 0.0;
  for (double fr : {150.0, 3300.0, 27000.0}) {
    const double w = 2.0 * M_PI * fr;
    const Eigen::VectorXcd ra = nodal_response(spec, w, nodes, {PointLoad{0.3, 1}});
    const Eigen::VectorXcd rb = nodal_response(spec, w, nodes, {PointLoad{0.9, 1}});
    recip = std::max(recip, std::abs(ra[3 * 3 + 1] - rb[1 * 3 + 1]) / std::abs(ra[3 * 3 + 1]));
  }
  // Mesh invariance: extra interior nodes leave the response unchanged.
  const std::vector<double> fine{0.0, 0.1, 0.3, 0.42, 0.55, 0.7, 0.9, 1.1, spec.length};
  double mesh = 0.0;
  for (double fr : {150.0, 3300.0, 27000.0}) {
    const double w = 2.0 * M_PI * fr;
    const Eigen::VectorXcd coarse = nodal_response(spec, w, nodes, {PointLoad{0.3, 1}});
    const Eigen::VectorXcd refined = nodal_response(spec, w, fine, {PointLoad{0.3, 1}});
    mesh = std::max(mesh, std::abs(coarse[3 * 3 + 1] - refined[6 * 3 + 1]) / std::abs(coarse[3 * 3 + 1]));
  }
  const double t = seconds_since(t0);
  const bool pass = worst_residual < kResidual && cutoff_dev < 1e-12 && recip < 1e-9 && mesh < 1e-9 && t < kSemSeconds;
  return {pass, f("residual %.1e (< 1e-10), cut-off dev %.1e, reciprocity %.1e, mesh %.1e", worst_residual, cutoff_dev,
                  recip, mesh) +
                    f(", %.1f s (< 60 s)", t)};
}

// Builds x(t) = sum_n A(w_n) cos(w_n t - k(w_n) x) by direct summation on the
// estimator's own record length, so its bins are exactly the synthesized ones.
ProcessedWaveform propagated(double x, const std::function<double(double)>& k, double fc, int cycles,
                             Eigen::Index n) {
  const double fs = 1e6;
  const ToneBurst burst = make_tone_burst(fc, cycles, fs);
  ProcessedWaveform wf;
  wf.time.resize(n);
  wf.samples = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) wf.time[i] = (static_cast<double>(i) + 0.5) / fs;
  const double df = fs / static_cast<double>(n);
  for (Eigen::Index b = 1; b < n / 2; ++b) {
    const double w = 2.0 * M_PI * df * static_cast<double>(b);
    cdouble a = 0.0;
    for (Eigen::Index s = 0; s < burst.n_samples(); ++s) a += burst.samples[s] * std::exp(cdouble(0.0, -w * wf.time[s]));
    if (std::abs(a) < 1e-12) continue;
    cdouble phasor = 2.0 / static_cast<double>(n) * a * std::exp(cdouble(0.0, w * wf.time[0] - k(w) * x));
    const cdouble step = std::exp(cdouble(0.0, w / fs));
    for (Eigen::Index i = 0; i < n; ++i) {
      wf.samples[i] += phasor.real();
      phasor *= step;
    }
  }
  wf.center_hz = fc;
  wf.n_cycles = cycles;
  wf.t_lo = wf.time[0];
  wf.t_hi = wf.time[n - 1];
  const Eigen::VectorXd env = envelope(wf.samples);
  Eigen::Index pk = 0;
  env.maxCoeff(&pk);
  wf.t_peak = wf.time[pk];
  return wf;
}

// 8. Wavenumber recovery from synthetically propagated signals.
Outcome propagation_oracle() {
  const auto t0 = Clock::now();
  struct Case {
    const char* name;
    std::function<double(double)> k;
    double fc;
    int cycles;
    double dx;
    bool anchored;
  };
  const double c0 = 5055.0;
  const double beta = 0.52;  // k = beta sqrt(w), Euler-Bernoulli-like
  const std::vector<Case> cases{
      {"non-dispersive", [=](double w) { return w / c0; }, 20000.0, 1, 0.0254, false},
      {"sqrt(w)", [=](double w) { return beta * std::sqrt(w); }, 10000.0, 2, 0.0254, false},
      {"wrapped", [=](double w) { return w / c0; }, 20000.0, 1, 0.2133, true},
  };
  double worst = 0.0;
  std::string detail;
  for (const Case& c : cases) {
    const double xi = 0.5, xj = 0.5 + c.dx;
    PairOptions opts;
    const ProcessedWaveform a = propagated(xi, c.k, c.fc, c.cycles, opts.nfft);
    const ProcessedWaveform b = propagated(xj, c.k, c.fc, c.cycles, opts.nfft);
    const double wc = 2.0 * M_PI * c.fc;
    if (c.anchored) opts.anchor = std::pair{wc, 1.01 * c.k(wc)};
    double dev = 1.0;
    try {
      const PairEstimate est = pair_wavenumber(a, b, xi, xj, opts);
      dev = 0.0;
      for (Eigen::Index i = 0; i < est.k.size(); ++i)
        if (est.valid[static_cast<std::size_t>(i)])
          dev = std::max(dev, std::abs(est.k[i] - c.k(est.omega[i])) / c.k(est.omega[i]));
      detail += std::string(detail.empty() ? "" : "; ") + c.name + f(" (k dx %.1f) %.1e", c.k(wc) * c.dx, dev);
    } catch (const std::exception& e) {
      detail += std::string(detail.empty() ? "" : "; ") + c.name + " threw " + e.what();
    }
    worst = std::max(worst, dev);
  }
  return {worst < kWavenumber, detail + f(" (< 1e-3), %.1f s", seconds_since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8};

  Shared shared;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"VF exact recovery", [] { return vf_exact_recovery(); }},
      {"flexural fit quality", [&] { return flexural_fit(shared); }},
      {"longitudinal model order", [&] { return longitudinal_fit(shared); }},
      {"flexural dispersion", [&] { return flexural_dispersion(shared); }},
      {"longitudinal dispersion", [&] { return longitudinal_dispersion(shared); }},
      {"boundary-condition invariance", [&] { return bc_invariance(shared); }},
      {"SEM self-checks", [&] { return sem_checks(shared); }},
      {"propagation-equation oracle", [] { return propagation_oracle(); }},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.count(id)) continue;
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    all = all && out.pass;
    std::printf("criterion %d [%s] %s: %s\n", id, out.pass ? "PASS" : "FAIL", criteria[i].first, out.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
