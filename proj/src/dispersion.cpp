#include "dispersim/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <unsupported/Eigen/FFT>

#include "dispersim/error.hpp"

namespace dispersim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double wrap_pi(double a) { return a - 2.0 * M_PI * std::round(a / (2.0 * M_PI)); }

// Linear-interpolated quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double median(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }),
               values.end());
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  return quantile(values, 0.5);
}

Eigen::Index PairEstimate::n_valid() const {
  return static_cast<Eigen::Index>(std::count(valid.begin(), valid.end(), true));
}

Eigen::VectorXcd waveform_spectrum(const ProcessedWaveform& wf, Eigen::Index nfft) {
  if (wf.samples.size() > nfft) throw ValidationError("FFT length shorter than the waveform");
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> in(static_cast<std::size_t>(nfft), 0.0);
  std::copy(wf.samples.data(), wf.samples.data() + wf.samples.size(), in.begin());
  std::vector<cdouble> out;
  fft.fwd(out, in);
  return Eigen::Map<Eigen::VectorXcd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

PairEstimate pair_wavenumber(const Eigen::VectorXcd& u_i_in, const Eigen::VectorXcd& u_j_in,
                             double sample_rate, double loc_i_in, double loc_j_in, double omega_c,
                             double arrival_delay, const PairOptions& options) {
  if (u_i_in.size() != u_j_in.size() || u_i_in.size() < 3)
    throw ValidationError("pair_wavenumber: spectra must share the same bins");
  if (loc_i_in == loc_j_in) throw ValidationError("pair_wavenumber: sensors coincide");
  // Reversed input order is the same pair.
  const bool swap = loc_j_in < loc_i_in;
  const Eigen::VectorXcd& u_i = swap ? u_j_in : u_i_in;
  const Eigen::VectorXcd& u_j = swap ? u_i_in : u_j_in;

  PairEstimate est;
  est.loc_i = swap ? loc_j_in : loc_i_in;
  est.loc_j = swap ? loc_i_in : loc_j_in;
  const double dx = est.dx();
  if (swap) arrival_delay = -arrival_delay;

  const Eigen::Index nb = u_i.size();
  const double d_omega = 2.0 * M_PI * sample_rate / (2.0 * static_cast<double>(nb - 1));
  est.omega = Eigen::VectorXd::LinSpaced(nb, 0.0, d_omega * static_cast<double>(nb - 1));
  est.k = Eigen::VectorXd::Constant(nb, kNaN);
  est.valid.assign(static_cast<std::size_t>(nb), false);

  const Eigen::VectorXd a = u_i.cwiseAbs();
  const Eigen::VectorXd b = u_j.cwiseAbs();
  const double a_lim = options.threshold * a.maxCoeff();
  const double b_lim = options.threshold * b.maxCoeff();
  auto above = [&](Eigen::Index i) { return i > 0 && a[i] >= a_lim && b[i] >= b_lim && a[i] > 0.0; };

  // The contiguous above-threshold run holding the strongest cross-spectrum bin.
  Eigen::Index best = -1;
  for (Eigen::Index i = 1; i < nb; ++i)
    if (above(i) && (best < 0 || a[i] * b[i] > a[best] * b[best])) best = i;
  if (best < 0) throw UnreliablePair("pair has no common band above the magnitude threshold");
  Eigen::Index lo = best, hi = best;
  while (lo > 1 && above(lo - 1)) --lo;
  while (hi + 1 < nb && above(hi + 1)) ++hi;
  const Eigen::Index len = hi - lo + 1;
  if (len < 2) throw UnreliablePair("pair band is a single bin");

  Eigen::VectorXd log_ratio(len);
  for (Eigen::Index t = 0; t < len; ++t) log_ratio[t] = std::log(b[lo + t] / a[lo + t]);
  const double sd = std::sqrt((log_ratio.array() - log_ratio.mean()).square().mean());
  if (sd > options.coherence_limit)
    throw UnreliablePair("pair (" + std::to_string(est.loc_i) + ", " + std::to_string(est.loc_j) +
                         ") magnitude ratio is unstable (sd of ln ratio " + std::to_string(sd) + ")");

  Eigen::VectorXd k_raw(len);
  double phase = -std::arg(u_j[lo] * std::conj(u_i[lo]));
  k_raw[0] = phase / dx;
  for (Eigen::Index t = 1; t < len; ++t) {
    const double next = -std::arg(u_j[lo + t] * std::conj(u_i[lo + t]));
    phase += wrap_pi(next - phase);
    k_raw[t] = phase / dx;
  }

  // Distance of every candidate branch m to the anchor.
  const double spacing = 2.0 * M_PI / dx;
  std::vector<double> offsets;  // anchor minus raw k, over the bins used for anchoring
  if (options.anchor_curve != nullptr) {
    const Eigen::VectorXd& ac = *options.anchor_curve;
    for (Eigen::Index t = 0; t < len; ++t)
      if (lo + t < ac.size() && std::isfinite(ac[lo + t])) offsets.push_back(ac[lo + t] - k_raw[t]);
  }
  if (offsets.empty()) {
    double w_a = omega_c;
    double k_a = omega_c * arrival_delay / dx;
    if (options.anchor) {
      w_a = options.anchor->first;
      k_a = options.anchor->second;
    }
    Eigen::Index ref = std::clamp<Eigen::Index>(
        static_cast<Eigen::Index>(std::llround(w_a / d_omega)), lo, hi);
    if (!options.anchor) k_a = est.omega[ref] * arrival_delay / dx;
    offsets.push_back(k_a - k_raw[ref - lo]);
  }
  const double offset = median(offsets);
  const double m_real = offset / spacing;
  const int m = static_cast<int>(std::llround(m_real));
  const double d1 = std::abs(m_real - m);
  const double d2 = 1.0 - d1;
  if (d2 - d1 < options.ambiguity_fraction)
    throw BranchAmbiguity("pair (" + std::to_string(est.loc_i) + ", " + std::to_string(est.loc_j) +
                          "): two wavenumber branches fit the arrival-time anchor equally well");
  est.branch = m;

  for (Eigen::Index t = 0; t < len; ++t) {
    est.k[lo + t] = k_raw[t] + m * spacing;
    est.valid[lo + t] = true;
  }
  est.f_lo_hz = est.omega[lo] / (2.0 * M_PI);
  est.f_hi_hz = est.omega[hi] / (2.0 * M_PI);
  return est;
}

PairEstimate pair_wavenumber(const ProcessedWaveform& wf_i, const ProcessedWaveform& wf_j,
                             double loc_i, double loc_j, const PairOptions& options) {
  if (wf_i.time.size() != wf_j.time.size() ||
      (wf_i.time.size() > 0 && wf_i.time[0] != wf_j.time[0]))
    throw ValidationError("pair_wavenumber: waveforms are on different time grids");
  if (wf_i.time.size() < 2) throw ValidationError("pair_wavenumber: waveform too short");
  const double fs = 1.0 / (wf_i.time[1] - wf_i.time[0]);
  const Eigen::Index nfft = std::max(options.nfft, wf_i.samples.size());
  return pair_wavenumber(waveform_spectrum(wf_i, nfft), waveform_spectrum(wf_j, nfft), fs, loc_i, loc_j,
                         2.0 * M_PI * wf_i.center_hz, wf_j.t_peak - wf_i.t_peak, options);
}

PairVelocity pair_group_velocity(const PairEstimate& est) {
  const Eigen::Index n = est.k.size();
  PairVelocity out;
  out.v_group = Eigen::VectorXd::Constant(n, kNaN);
  if (n < 5 || est.n_valid() < 5) {
    out.diagnostic = "fewer than 5 valid bins";
    return out;
  }
  const double h = est.omega[1] - est.omega[0];
  Eigen::Index produced = 0;
  for (Eigen::Index i = 2; i + 2 < n; ++i) {
    bool ok = true;
    for (Eigen::Index d = -2; d <= 2 && ok; ++d) ok = est.valid[i + d];
    if (!ok) continue;
    const double slope =
        (-2.0 * est.k[i - 2] - est.k[i - 1] + est.k[i + 1] + 2.0 * est.k[i + 2]) / (10.0 * h);
    if (slope > 0.0) {
      out.v_group[i] = 1.0 / slope;
      ++produced;
    }
  }
  if (produced == 0) out.diagnostic = "k is not increasing anywhere in the valid band";
  return out;
}

SweepOptions default_sweep(ExcitationMode mode) {
  SweepOptions o;
  const bool flex = mode == ExcitationMode::Flexural;
  const double top = flex ? 48000.0 : 45000.0;
  for (double f = 2000.0; f <= top + 1e-9; f += 1000.0) o.centers_hz.push_back(f);
  o.n_cycles = flex ? 2 : 1;
  o.extract = default_extract_options(mode);
  o.extract.follow_fraction = 0.05;
  o.isolated_only = true;
  o.pair.threshold = 0.2;
  o.band_limit_hz = 50000.0;
  return o;
}

DispersionCurve sweep_and_aggregate(const RationalModel& model, const Eigen::VectorXd& locations,
                                    const SweepOptions& options) {
  if (options.centers_hz.empty()) throw ValidationError("sweep needs at least one center frequency");
  if (!std::is_sorted(options.centers_hz.begin(), options.centers_hz.end()))
    throw ValidationError("sweep center frequencies must be ascending");
  if (locations.size() != model.n_outputs())
    throw ValidationError("sweep: one location per model output required");
  if (options.min_pairs < 1) throw ValidationError("sweep: min_pairs must be >= 1");

  std::vector<Eigen::Index> channels = options.channels;
  if (channels.empty())
    for (Eigen::Index c = 0; c < model.n_outputs(); ++c) channels.push_back(c);
  for (Eigen::Index c : channels)
    if (c < 0 || c >= model.n_outputs()) throw ValidationError("sweep: channel out of range");
  if (channels.size() < 2) throw ValidationError("sweep needs at least two sensors");

  struct Pair {
    std::size_t i, j;
    double dx;
  };
  std::vector<Pair> pairs;
  for (std::size_t a = 0; a < channels.size(); ++a)
    for (std::size_t b = a + 1; b < channels.size(); ++b) {
      const double xa = locations[channels[a]], xb = locations[channels[b]];
      pairs.push_back(xa < xb ? Pair{a, b, xb - xa} : Pair{b, a, xa - xb});
    }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& p, const Pair& q) { return p.dx < q.dx - 1e-12; });

  const Eigen::Index nfft = options.pair.nfft;
  const Eigen::Index nb = nfft / 2 + 1;
  const double d_f = options.sample_rate / static_cast<double>(nfft);
  std::vector<std::vector<double>> v_all(static_cast<std::size_t>(nb));
  std::vector<std::vector<double>> k_all(static_cast<std::size_t>(nb));
  Eigen::VectorXd reference = Eigen::VectorXd::Constant(nb, kNaN);

  auto median_curve = [&](const std::vector<std::vector<double>>& lists, std::size_t min_count) {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(nb, kNaN);
    for (Eigen::Index b = 0; b < nb; ++b)
      if (lists[b].size() >= min_count) out[b] = median(lists[b]);
    return out;
  };

  double f_top = 0.0;
  for (double fc : options.centers_hz) {
    const ToneBurst burst = make_tone_burst(fc, options.n_cycles, options.sample_rate);
    SimulateOptions sim;
    sim.remove_wraparound = true;
    sim.band_limit_hz = options.band_limit_hz;
    const TransientRecord record = simulate(model, burst, options.duration, sim);
    f_top = std::max(f_top, fc);

    std::vector<Eigen::VectorXcd> spectra(channels.size());
    std::vector<double> arrivals(channels.size(), kNaN);
    for (std::size_t c = 0; c < channels.size(); ++c) {
      try {
        const ProcessedWaveform wf = extract_incident(record, channels[c], options.extract);
        if (options.isolated_only && !wf.isolated) continue;
        spectra[c] = waveform_spectrum(wf, std::max(nfft, wf.samples.size()));
        arrivals[c] = wf.t_peak;
      } catch (const NoArrival&) {
      }
    }

    std::vector<std::vector<double>> k_here(static_cast<std::size_t>(nb));
    Eigen::VectorXd anchor = reference;
    double group_dx = -1.0;
    for (const Pair& p : pairs) {
      if (spectra[p.i].size() == 0 || spectra[p.j].size() == 0) continue;
      if (std::abs(p.dx - group_dx) > 1e-12) {
        // New spacing: anchor on what this center frequency has settled so far.
        group_dx = p.dx;
        const Eigen::VectorXd here = median_curve(k_here, 3);
        for (Eigen::Index b = 0; b < nb; ++b)
          anchor[b] = std::isfinite(here[b]) ? here[b] : reference[b];
      }
      PairOptions po = options.pair;
      po.nfft = nfft;
      po.anchor_curve = &anchor;
      PairEstimate est;
      try {
        est = pair_wavenumber(spectra[p.i], spectra[p.j], options.sample_rate,
                              locations[channels[p.i]], locations[channels[p.j]], 2.0 * M_PI * fc,
                              arrivals[p.j] - arrivals[p.i], po);
      } catch (const UnreliablePair&) {
        continue;
      } catch (const BranchAmbiguity&) {
        continue;
      }
      const PairVelocity vel = pair_group_velocity(est);
      for (Eigen::Index b = 0; b < nb; ++b) {
        if (!est.valid[b]) continue;
        k_here[b].push_back(est.k[b]);
        const double f = static_cast<double>(b) * d_f;
        if (f < options.f_min_hz || !std::isfinite(vel.v_group[b])) continue;
        if (options.band_fraction > 0.0 && std::abs(f - fc) > options.band_fraction * fc) continue;
        v_all[b].push_back(vel.v_group[b]);
        k_all[b].push_back(est.k[b]);
      }
    }
    const Eigen::VectorXd settled = median_curve(k_here, 3);
    for (Eigen::Index b = 0; b < nb; ++b)
      if (std::isfinite(settled[b])) reference[b] = settled[b];
  }

  // Emit bins from f_min up to the top center frequency's band edge.
  const double f_max = f_top * (1.0 + 1.0 / options.n_cycles);
  const auto first = static_cast<Eigen::Index>(std::ceil(options.f_min_hz / d_f - 1e-9));
  const Eigen::Index last = std::min<Eigen::Index>(nb - 1, static_cast<Eigen::Index>(std::floor(f_max / d_f)));
  DispersionCurve curve;
  curve.resize(std::max<Eigen::Index>(0, last - first + 1));
  for (Eigen::Index b = first; b <= last; ++b) {
    const Eigen::Index i = b - first;
    curve.freq_hz[i] = static_cast<double>(b) * d_f;
    curve.flagged[i] = curve.freq_hz[i] > options.flag_above_hz;
    auto& v = v_all[b];
    if (static_cast<int>(v.size()) < options.min_pairs) continue;
    std::sort(v.begin(), v.end());
    curve.v_group[i] = quantile(v, 0.5);
    curve.spread[i] = (quantile(v, 0.75) - quantile(v, 0.25)) / 1.349;
    curve.k[i] = median(k_all[b]);
    curve.n_pairs[i] = static_cast<int>(v.size());
  }
  return curve;
}

ComparisonReport compare_to_oracle(const DispersionCurve& curve, const DispersionCurve& oracle,
                                   double f_lo_hz, double f_hi_hz) {
  ComparisonReport rep;
  rep.f_lo_hz = f_lo_hz;
  rep.f_hi_hz = f_hi_hz;
  std::vector<double> freqs, devs;
  const Eigen::Index m = oracle.size();
  for (Eigen::Index i = 0; i < curve.size(); ++i) {
    const double f = curve.freq_hz[i];
    if (!curve.valid(i) || f < f_lo_hz || f > f_hi_hz) continue;
    auto it = std::lower_bound(oracle.freq_hz.data(), oracle.freq_hz.data() + m, f);
    const Eigen::Index hi = it - oracle.freq_hz.data();
    double ref = kNaN;
    if (hi < m && oracle.freq_hz[hi] == f) {
      ref = oracle.valid(hi) ? oracle.v_group[hi] : kNaN;
    } else if (hi > 0 && hi < m && oracle.valid(hi - 1) && oracle.valid(hi)) {
      const double t = (f - oracle.freq_hz[hi - 1]) / (oracle.freq_hz[hi] - oracle.freq_hz[hi - 1]);
      ref = (1.0 - t) * oracle.v_group[hi - 1] + t * oracle.v_group[hi];
    }
    if (!std::isfinite(ref)) continue;
    freqs.push_back(f);
    devs.push_back(std::abs(curve.v_group[i] - ref) / std::abs(ref));
  }
  if (devs.empty()) throw NoOverlap("curve and oracle share no valid bins in the requested band");
  rep.n_bins = static_cast<Eigen::Index>(devs.size());
  rep.freq_hz = Eigen::Map<Eigen::VectorXd>(freqs.data(), rep.n_bins);
  rep.deviation = Eigen::Map<Eigen::VectorXd>(devs.data(), rep.n_bins);
  rep.median = median(devs);
  rep.max = rep.deviation.maxCoeff();
  return rep;
}

}  // namespace dispersim
