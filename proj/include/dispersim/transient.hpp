#pragma once

// Tone-burst excitation, transient simulation through a fitted model and
// incident-wave extraction.
//
// Sample k of every signal sits at t = (k + 1/2) / sample_rate.

#include <Eigen/Core>

#include "dispersim/vecfit.hpp"

namespace dispersim {

struct ToneBurst {
  double center_hz = 0.0;
  int n_cycles = 0;
  double sample_rate = 0.0;
  Eigen::VectorXd samples;  ///< the input signal, may be longer than the burst

  Eigen::Index n_samples() const { return samples.size(); }
  double duration() const { return n_cycles / center_hz; }
};

/// sin(2 pi fc t) under a Hann envelope over [0, n_cycles / fc], scaled so the
/// largest |sample| is 1. Throws ValidationError if sample_rate < 20 fc.
ToneBurst make_tone_burst(double center_hz, int n_cycles, double sample_rate = 1e6);

/// Hann envelope of the burst at time t (0 outside the burst).
double burst_envelope(const ToneBurst& burst, double t);

struct TransientRecord {
  Eigen::VectorXd time;      ///< s
  Eigen::MatrixXd channels;  ///< [n_outputs x n_samples]
  ToneBurst excitation;
  Eigen::Index padded_samples = 0;  ///< FFT length used

  Eigen::Index n_samples() const { return time.size(); }
  double sample_rate() const { return excitation.sample_rate; }
};

struct SimulateOptions {
  Eigen::Index min_padded = 0;  ///< lower bound on the FFT length
  /// Subtract, pole by pole, the tail that circular convolution folds back
  /// into the record (closed form for a pole-residue model). The wraparound
  /// check is skipped because nothing is left to wrap.
  bool remove_wraparound = false;
  /// When > 0, H is rolled off to zero over the last 5% below this frequency
  /// (Hz) instead of being extrapolated beyond the fitted range.
  double band_limit_hz = 0.0;
};

/// Response of every model output to `burst` over [0, duration), by FFT
/// convolution with H(i omega) sampled on the bins. The input is zero padded to
/// at least max(2 * duration, min_padded) samples. Throws UnstableModel for
/// poles with Re >= 0 and PaddingError when more than 0.1% of the padded
/// response energy sits in its last 5%.
TransientRecord simulate(const RationalModel& model, const ToneBurst& burst, double duration,
                         const SimulateOptions& options = {});

/// Like simulate(), but grows the padding by the suggested amount until the
/// wraparound check passes (at most `max_attempts` tries).
TransientRecord simulate_padded(const RationalModel& model, const ToneBurst& burst, double duration,
                                int max_attempts = 6);

/// Magnitude of the analytic signal of x.
Eigen::VectorXd envelope(const Eigen::VectorXd& x);

struct ExtractOptions {
  double kappa = 1.5;         ///< window half-width in units of T_b / 2
  double gamma = 0.0;         ///< taper rate (1/s); 0 means 10 / T_b
  double peak_fraction = 0.5; ///< "dominant" envelope maxima reach this share of the global max
  /// When > 0, each window edge moves further out while the envelope keeps
  /// falling and stays above this share of the arrival's peak, so a
  /// dispersed packet is not cut. It never passes an envelope minimum.
  double follow_fraction = 0.0;
};

ExtractOptions default_extract_options(ExcitationMode mode);

struct ProcessedWaveform {
  Eigen::VectorXd time;
  Eigen::VectorXd samples;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double t_peak = 0.0;
  double center_hz = 0.0;
  int n_cycles = 0;
  bool truncated = false;  ///< window ran past the end of the record
  /// With follow_fraction > 0: both window edges reached the envelope floor
  /// instead of stopping in a valley shared with another arrival.
  bool isolated = true;
};

/// Keeps the first dominant arrival of one channel and tapers everything else
/// by exp(-gamma * distance outside the window). Throws NoArrival when the
/// channel is below 10x the numerical floor (1e-12 of the record's peak).
ProcessedWaveform extract_incident(const TransientRecord& record, Eigen::Index channel,
                                   const ExtractOptions& options = {});

}  // namespace dispersim
