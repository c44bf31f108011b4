#pragma once

// Wavenumber and group-velocity estimation from pairs of processed waveforms,
// using U_j(w) = U_i(w) exp(-i k (x_j - x_i)).

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dispersim/curve.hpp"
#include "dispersim/transient.hpp"

namespace dispersim {

struct PairOptions {
  Eigen::Index nfft = 16384;        ///< common FFT length; fixes the frequency bins
  double threshold = 0.1;           ///< valid where both |U| exceed this share of their peak
  double coherence_limit = 1.5;     ///< max std-dev of ln|U_j/U_i| over the valid band
  double ambiguity_fraction = 0.05; ///< of the branch spacing 2 pi / dx
  /// Branch anchor (omega rad/s, k 1/m). Without one, the group-delay
  /// estimate omega_c * dt / dx at the burst center is used.
  std::optional<std::pair<double, double>> anchor;
  /// Previously estimated k on the same bins (NaN where unknown). When it
  /// overlaps the valid band it takes precedence over `anchor`.
  const Eigen::VectorXd* anchor_curve = nullptr;
};

struct PairEstimate {
  double loc_i = 0.0;
  double loc_j = 0.0;
  double f_lo_hz = 0.0;  ///< valid band
  double f_hi_hz = 0.0;
  Eigen::VectorXd omega;  ///< FFT bins 0 .. nfft/2, rad/s
  Eigen::VectorXd k;      ///< 1/m, NaN off the valid band
  std::vector<bool> valid;
  int branch = 0;  ///< integer m added as 2 pi m / dx

  double dx() const { return loc_j - loc_i; }
  Eigen::Index n_valid() const;
};

/// One-sided spectrum (bins 0 .. nfft/2) of a waveform.
Eigen::VectorXcd waveform_spectrum(const ProcessedWaveform& wf, Eigen::Index nfft);

/// k(w) for the pair (i, j), dx = x_j - x_i > 0.
/// Throws UnreliablePair when the magnitude ratio is unstable over the band and
/// BranchAmbiguity when two branches sit equally close to the anchor.
PairEstimate pair_wavenumber(const ProcessedWaveform& wf_i, const ProcessedWaveform& wf_j,
                             double loc_i, double loc_j, const PairOptions& options = {});

/// Same, from spectra already on the common bins. `sample_rate` sets the bin spacing.
PairEstimate pair_wavenumber(const Eigen::VectorXcd& u_i, const Eigen::VectorXcd& u_j,
                             double sample_rate, double loc_i, double loc_j,
                             double omega_c, double arrival_delay, const PairOptions& options = {});

struct PairVelocity {
  Eigen::VectorXd v_group;  ///< NaN where invalid or dk/dw <= 0
  std::string diagnostic;   ///< set when nothing valid was produced
};

/// 1 / (dk/dw) with the 5-point quadratic-fit derivative; needs 5 contiguous
/// valid bins around each output bin.
PairVelocity pair_group_velocity(const PairEstimate& est);

struct SweepOptions {
  std::vector<double> centers_hz;
  int n_cycles = 2;
  double sample_rate = 1e6;
  double duration = 4e-3;   ///< simulated record length (s)
  ExtractOptions extract;
  PairOptions pair;
  double f_min_hz = 2000.0;    ///< bins below are dropped
  double flag_above_hz = 45000.0;
  int min_pairs = 3;
  /// Each burst contributes only bins with |f - fc| <= band_fraction * fc (0: whole valid band).
  double band_fraction = 0.0;
  /// Skip waveforms whose arrival shares an envelope valley with another one.
  bool isolated_only = false;
  double band_limit_hz = 0.0;  ///< passed to simulate(); normally the top of the fitted range
  std::vector<Eigen::Index> channels;  ///< empty: every output
};

/// Default sweep: 2-48 kHz (flexural, 2 cycles) or 2-45 kHz (longitudinal, 1 cycle), 1 kHz steps,
/// adaptive window edges at 5% of the arrival peak, isolated arrivals only, a 20% pair
/// threshold and the model band-limited to 50 kHz.
SweepOptions default_sweep(ExcitationMode mode);

/// Simulates every center frequency, estimates all sensor pairs and takes the
/// per-bin median over pairs and center frequencies. spread = IQR / 1.349.
/// Bins with fewer than min_pairs contributions are dropped (n_pairs = 0).
DispersionCurve sweep_and_aggregate(const RationalModel& model, const Eigen::VectorXd& locations,
                                    const SweepOptions& options);

struct ComparisonReport {
  double f_lo_hz = 0.0;
  double f_hi_hz = 0.0;
  Eigen::VectorXd freq_hz;    ///< compared bins
  Eigen::VectorXd deviation;  ///< |v - v_oracle| / v_oracle
  double median = 0.0;
  double max = 0.0;
  Eigen::Index n_bins = 0;
};

/// Compares valid curve bins in [f_lo, f_hi] with the oracle interpolated
/// linearly. Throws NoOverlap when no bin can be compared.
ComparisonReport compare_to_oracle(const DispersionCurve& curve, const DispersionCurve& oracle,
                                   double f_lo_hz, double f_hi_hz);

/// Median of finite values (NaN if none).
double median(std::vector<double> values);

}  // namespace dispersim
