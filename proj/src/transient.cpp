#include "dispersim/transient.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "dispersim/error.hpp"

namespace dispersim {

namespace {

Eigen::Index next_pow2(Eigen::Index n) {
  Eigen::Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

double sample_time(Eigen::Index k, double fs) { return (static_cast<double>(k) + 0.5) / fs; }

// Circular convolution with the sampled H equals convolution with the
// periodised kernel dt e^{pt} / (1 - e^{pT}) per pole. This returns, for the
// first n samples of every output, what that kernel adds on top of the causal
// one: inputs up to m contribute through e^{pT} e^{p (m - k) dt}, later inputs
// only through the wrapped e^{p (T - (k - m) dt)}.
Eigen::MatrixXd wrapped_tails(const RationalModel& model, const ToneBurst& burst, Eigen::Index nfft,
                              Eigen::Index n) {
  const double dt = 1.0 / burst.sample_rate;
  const double period = dt * static_cast<double>(nfft);
  const Eigen::VectorXd& s = burst.samples;
  const Eigen::Index len = s.size();
  const Eigen::Index r = model.order();
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(r, n);
  for (Eigen::Index j = 0; j < r; ++j) {
    const cdouble p = model.poles[j];
    const cdouble ept = std::exp(p * period);
    if (std::abs(ept) == 0.0) continue;
    const cdouble step = std::exp(p * dt);
    // Inputs at or before m: e^{pT} sum s_k e^{p (m - k) dt}.
    cdouble before = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      before = before * step + (m < len ? s[m] : 0.0);
      z(j, m) = ept * before;
    }
    // Inputs after m, which only reach m by wrapping: sum s_k e^{p (T - (k - m) dt)}.
    const cdouble back = 1.0 / step;
    cdouble after = 0.0;
    for (Eigen::Index m = std::min(len, n) - 1; m >= 0; --m) {
      after = back * (after + (m + 1 < len ? s[m + 1] * ept : 0.0));
      z(j, m) += after;
    }
    z.row(j) *= dt / (1.0 - ept);
  }
  return (model.residues * z).real();
}

}  // namespace

ToneBurst make_tone_burst(double center_hz, int n_cycles, double sample_rate) {
  if (!(center_hz > 0.0)) throw ValidationError("tone burst center frequency must be positive");
  if (n_cycles < 1) throw ValidationError("tone burst needs at least one cycle");
  if (!(sample_rate >= 20.0 * center_hz))
    throw ValidationError("sample rate " + std::to_string(sample_rate) + " Hz aliases a " +
                          std::to_string(center_hz) + " Hz burst (need >= 20x center)");
  ToneBurst burst;
  burst.center_hz = center_hz;
  burst.n_cycles = n_cycles;
  burst.sample_rate = sample_rate;
  const auto n = static_cast<Eigen::Index>(std::llround(burst.duration() * sample_rate));
  burst.samples.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = sample_time(k, sample_rate);
    burst.samples[k] = std::sin(2.0 * M_PI * center_hz * t) * burst_envelope(burst, t);
  }
  burst.samples /= burst.samples.cwiseAbs().maxCoeff();
  return burst;
}

double burst_envelope(const ToneBurst& burst, double t) {
  const double T = burst.duration();
  if (t < 0.0 || t > T) return 0.0;
  return 0.5 * (1.0 - std::cos(2.0 * M_PI * t / T));
}

TransientRecord simulate(const RationalModel& model, const ToneBurst& burst, double duration,
                         const SimulateOptions& options) {
  if (model.order() == 0) throw ValidationError("simulate: empty model");
  if (model.poles.max_real() >= 0.0) throw UnstableModel("simulate: model has poles with Re >= 0");
  const double fs = burst.sample_rate;
  const auto n = static_cast<Eigen::Index>(std::llround(duration * fs));
  if (n < 1) throw ValidationError("simulate: duration shorter than one sample");
  if (burst.n_samples() > n) throw ValidationError("simulate: duration shorter than the excitation");

  const Eigen::Index nfft = next_pow2(std::max<Eigen::Index>(2 * n, options.min_padded));
  const Eigen::Index half = nfft / 2 + 1;
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);

  std::vector<double> input(static_cast<std::size_t>(nfft), 0.0);
  std::copy(burst.samples.data(), burst.samples.data() + burst.n_samples(), input.begin());
  std::vector<cdouble> spectrum;
  fft.fwd(spectrum, input);

  const Eigen::Index q = model.n_outputs();
  const Eigen::Index r = model.order();
  const Eigen::VectorXcd& poles = model.poles.values();
  const double w_hi = 2.0 * M_PI * options.band_limit_hz;
  const double w_lo = 0.95 * w_hi;
  auto rolloff = [&](double w) {
    if (w_hi <= 0.0 || w <= w_lo) return 1.0;
    if (w >= w_hi) return 0.0;
    return 0.5 * (1.0 + std::cos(M_PI * (w - w_lo) / (w_hi - w_lo)));
  };
  Eigen::MatrixXcd response(q, half);
  constexpr Eigen::Index kChunk = 2048;
  Eigen::MatrixXcd kernel(r, kChunk);
  for (Eigen::Index start = 0; start < half; start += kChunk) {
    const Eigen::Index len = std::min(kChunk, half - start);
    for (Eigen::Index b = 0; b < len; ++b) {
      const cdouble s(0.0, 2.0 * M_PI * fs * static_cast<double>(start + b) / static_cast<double>(nfft));
      kernel.col(b) = (s - poles.array()).inverse().matrix() * (spectrum[start + b] * rolloff(s.imag()));
    }
    response.middleCols(start, len) = model.residues * kernel.leftCols(len);
  }
  // The Nyquist bin of a real signal is real.
  response.col(half - 1) = response.col(half - 1).real().cast<cdouble>();

  TransientRecord record;
  record.excitation = burst;
  record.padded_samples = nfft;
  record.time.resize(n);
  for (Eigen::Index m = 0; m < n; ++m) record.time[m] = sample_time(m, fs);
  record.channels.resize(q, n);

  const Eigen::Index tail = std::max<Eigen::Index>(1, nfft / 20);
  std::vector<cdouble> row(static_cast<std::size_t>(half));
  std::vector<double> out;
  for (Eigen::Index c = 0; c < q; ++c) {
    for (Eigen::Index b = 0; b < half; ++b) row[b] = response(c, b);
    fft.inv(out, row, nfft);
    const Eigen::Map<const Eigen::VectorXd> y(out.data(), nfft);
    const double total = y.squaredNorm();
    if (!options.remove_wraparound && total > 0.0 && y.tail(tail).squaredNorm() > 1e-3 * total)
      throw PaddingError("simulate: response wraps around the " + std::to_string(nfft) +
                             "-sample FFT record; increase padding",
                         static_cast<std::size_t>(2 * nfft));
    record.channels.row(c) = y.head(n).transpose();
  }
  if (options.remove_wraparound) record.channels -= wrapped_tails(model, burst, nfft, n);
  if (!record.channels.allFinite()) throw NumericalError("simulate: non-finite response");
  return record;
}

TransientRecord simulate_padded(const RationalModel& model, const ToneBurst& burst, double duration,
                                int max_attempts) {
  Eigen::Index pad = 0;
  for (int attempt = 1;; ++attempt) {
    try {
      SimulateOptions o;
      o.min_padded = pad;
      return simulate(model, burst, duration, o);
    } catch (const PaddingError& e) {
      if (attempt >= max_attempts) throw;
      pad = static_cast<Eigen::Index>(e.suggested_samples());
    }
  }
}

Eigen::VectorXd envelope(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  const Eigen::Index nfft = next_pow2(2 * n);
  Eigen::FFT<double> fft;
  std::vector<cdouble> in(static_cast<std::size_t>(nfft), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) in[i] = x[i];
  std::vector<cdouble> spec;
  fft.fwd(spec, in);
  for (Eigen::Index b = 1; b < nfft / 2; ++b) spec[b] *= 2.0;
  for (Eigen::Index b = nfft / 2 + 1; b < nfft; ++b) spec[b] = 0.0;
  std::vector<cdouble> analytic;
  fft.inv(analytic, spec);
  Eigen::VectorXd env(n);
  for (Eigen::Index i = 0; i < n; ++i) env[i] = std::abs(analytic[i]);
  return env;
}

ExtractOptions default_extract_options(ExcitationMode mode) {
  ExtractOptions o;
  o.kappa = mode == ExcitationMode::Flexural ? 1.5 : 1.2;
  return o;
}

ProcessedWaveform extract_incident(const TransientRecord& record, Eigen::Index channel,
                                   const ExtractOptions& options) {
  if (channel < 0 || channel >= record.channels.rows())
    throw ValidationError("extract_incident: channel out of range");
  if (!(options.kappa > 0.0) || options.gamma < 0.0 || !(options.peak_fraction > 0.0))
    throw ValidationError("extract_incident: kappa and peak fraction must be positive, gamma >= 0");
  const Eigen::VectorXd x = record.channels.row(channel).transpose();
  const double floor = 1e-12 * record.channels.cwiseAbs().maxCoeff();
  if (!(x.cwiseAbs().maxCoeff() >= 10.0 * floor) || x.cwiseAbs().maxCoeff() == 0.0)
    throw NoArrival("channel " + std::to_string(channel) + " carries no response above the numerical floor");

  const Eigen::VectorXd env = envelope(x);
  const double threshold = options.peak_fraction * env.maxCoeff();
  const Eigen::Index n = env.size();
  Eigen::Index pk = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || env[i] >= env[i - 1];
    const bool right_ok = i + 1 == n || env[i] >= env[i + 1];
    if (env[i] >= threshold && left_ok && right_ok) {
      pk = i;
      break;
    }
  }
  if (pk < 0) throw NoArrival("channel " + std::to_string(channel) + ": no dominant envelope peak");

  const double dt = 1.0 / record.sample_rate();
  double t_peak = record.time[pk];
  if (pk > 0 && pk + 1 < n) {
    const double a = env[pk - 1], b = env[pk], c = env[pk + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) t_peak += 0.5 * (a - c) / denom * dt;
  }

  const ToneBurst& burst = record.excitation;
  const double tb = burst.duration();
  const double gamma = options.gamma > 0.0 ? options.gamma : 10.0 / tb;
  ProcessedWaveform wf;
  wf.time = record.time;
  wf.t_peak = t_peak;
  wf.t_lo = t_peak - 0.5 * options.kappa * tb;
  wf.t_hi = t_peak + 0.5 * options.kappa * tb;
  if (options.follow_fraction > 0.0) {
    const double floor_env = options.follow_fraction * env[pk];
    Eigen::Index i = pk;
    while (i > 0 && env[i - 1] <= env[i] && env[i - 1] >= floor_env) --i;
    wf.t_lo = std::min(wf.t_lo, record.time[i]);
    const bool left_clear = i == 0 || env[i - 1] < floor_env;
    i = pk;
    while (i + 1 < n && env[i + 1] <= env[i] && env[i + 1] >= floor_env) ++i;
    wf.t_hi = std::max(wf.t_hi, record.time[i]);
    const bool right_clear = i + 1 == n || env[i + 1] < floor_env;
    wf.isolated = left_clear && right_clear;
  }
  wf.center_hz = burst.center_hz;
  wf.n_cycles = burst.n_cycles;
  wf.truncated = wf.t_hi > record.time[n - 1];
  wf.samples = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = record.time[i];
    const double outside = t < wf.t_lo ? wf.t_lo - t : (t > wf.t_hi ? t - wf.t_hi : 0.0);
    if (outside > 0.0) wf.samples[i] *= std::exp(-gamma * outside);
  }
  return wf;
}

}  // namespace dispersim
