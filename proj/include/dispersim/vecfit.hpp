#pragma once

// Vector fitting of SIMO frequency responses.
//
// A model is a strictly proper sum of first-order terms sharing one pole set:
//   H(s) = sum_j residue(c, j) / (s - pole_j)
// with poles closed under conjugation. The real state-space realization uses
// 2x2 blocks [[a, b], [-b, a]] for each pair a +- ib with input vector [2, 0]
// and output row [Re r, Im r].

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dispersim/dataset.hpp"

namespace dispersim {

/// Conjugate-closed pole set. Pairs are stored adjacently (upper member, Im > 0,
/// first); real poles stand alone. Ordering is canonical: ascending |Im|, then Re.
class PoleSet {
 public:
  PoleSet() = default;
  /// Builds the set from one representative per pair (any sign of Im) or real pole.
  static PoleSet from_representatives(std::vector<cdouble> reps);

  Eigen::Index size() const { return poles_.size(); }
  bool empty() const { return poles_.size() == 0; }
  const Eigen::VectorXcd& values() const { return poles_; }
  cdouble operator[](Eigen::Index i) const { return poles_[i]; }
  /// One entry per pair (Im > 0) or real pole, canonical order.
  std::vector<cdouble> representatives() const;
  /// True when poles_[i] is the upper member of a conjugate pair.
  bool is_pair_start(Eigen::Index i) const;

  double max_real() const;
  /// Smallest pairwise distance relative to the larger magnitude.
  double min_relative_separation() const;

 private:
  Eigen::VectorXcd poles_;
};

/// One step of the barycentric iteration: numerator residues phi (per output)
/// and the shared denominator weights psi, both attached to `poles`.
struct BarycentricIterate {
  PoleSet poles;
  Eigen::MatrixXcd phi;  ///< [n_outputs x r]
  Eigen::VectorXcd psi;  ///< [r]
  double condition = 0.0;  ///< condition estimate of the column-scaled psi system
};

struct RationalModel {
  PoleSet poles;
  Eigen::MatrixXcd residues;  ///< [n_outputs x r]
  Eigen::MatrixXd A;          ///< r x r, block diagonal
  Eigen::MatrixXd B;          ///< r x 1
  Eigen::MatrixXd C;          ///< n_outputs x r

  Eigen::Index order() const { return poles.size(); }
  Eigen::Index n_outputs() const { return residues.rows(); }

  /// H(s) from poles and residues.
  Eigen::VectorXcd evaluate(cdouble s) const;
  /// [n_outputs x n_freq] at s = i*omega.
  Eigen::MatrixXcd evaluate_grid(const Eigen::VectorXd& omega) const;
  /// C (sI - A)^{-1} B, independent of the pole/residue path.
  Eigen::VectorXcd evaluate_state_space(cdouble s) const;
};

/// Builds A, B, C from poles and residues.
void realize(RationalModel& model);

struct PeakOptions {
  int channel = -1;  ///< -1: all channels
  double min_prominence_db = 0.1;
  int window = 1000;  ///< half-width (points) of the prominence search
  /// With channel = -1: a resonance needs a peak on at least this many
  /// channels, within cluster_tolerance (relative) of each other. Datasets
  /// with fewer channels, or 0 here, use the RMS over channels instead.
  int min_channels = 5;
  double cluster_tolerance = 0.005;
};

/// Resonance frequencies (Hz, ascending) of one channel or of all channels.
std::vector<double> detect_peaks(const FrfDataset& frf, const PeakOptions& options = {});

/// Conjugate pairs -beta/100 +- i beta for each peak (beta = 2 pi f), deduplicated.
PoleSet init_poles(const std::vector<double>& peaks_hz);

/// Per-channel inverse magnitude weights 1 / max(|H|, floor * max|H|).
Eigen::MatrixXd inverse_magnitude_weights(const Eigen::MatrixXcd& values, double floor = 1e-12);

struct VfSettings {
  double tolerance = 1e-6;     ///< max relative pole movement
  int max_iterations = 30;     ///< per band
  int max_full_iterations = 5;  ///< each full-range step costs ~15 s on the reference data
  double weight_floor = 1e-12;
  bool inverse_weighting = true;
  double condition_limit = 1e13;
  double dedupe_tolerance = 1e-4;
  /// Extra pole pairs placed just outside each band (one below, one above per
  /// unit) to absorb out-of-band modes. Not counted in the band budget, dropped
  /// at the merge unless they move into the band, and left out when they make
  /// the band's fit ill-conditioned.
  int guard_pairs = 1;
  PeakOptions peaks;
};

/// Solves the linearised weighted problem
///   min sum_c sum_j | w_cj ( sum phi_c / (s_j - pole) - (1 + sum psi / (s_j - pole)) H_cj ) |^2
/// in real arithmetic. `values` is [n_outputs x N], `weights` the same shape.
/// Throws IllConditionedFit when the psi system's condition exceeds the limit.
BarycentricIterate vf_iterate(const Eigen::VectorXd& omega, const Eigen::MatrixXcd& values,
                              const PoleSet& poles, const Eigen::MatrixXd& weights,
                              double condition_limit = 1e13);

/// Zeros of 1 + sum psi_j / (s - pole_j), reflected into the left half plane.
PoleSet relocate_poles(const BarycentricIterate& iterate);

/// Residues with the poles held fixed (weighted least squares per channel).
RationalModel fit_residues(const Eigen::VectorXd& omega, const Eigen::MatrixXcd& values,
                           const PoleSet& poles, const Eigen::MatrixXd& weights);

struct Band {
  double f_lo_hz = 0.0;
  double f_hi_hz = 0.0;
  int pole_budget = 2;
};

struct BandPlan {
  std::vector<Band> bands;
  /// Throws ValidationError unless bands are contiguous, ordered and cover [f_min, f_max].
  void validate(double f_min_hz, double f_max_hz) const;
};

/// Seven bands with the budgets that fit the reference flexural data.
BandPlan default_flexural_plan();
/// One band covering the grid with 48 poles.
BandPlan default_longitudinal_plan(double f_min_hz = 10.0, double f_max_hz = 50000.0);

struct BandFit {
  Band band;
  std::vector<double> peaks_hz;
  PoleSet initial_poles;
  PoleSet poles;
  int iterations = 0;
  bool converged = false;
  double rel_error = 0.0;
};

/// Fits one band starting from its detected peaks, padded up to the budget.
/// `poles` may include guard poles outside the band.
BandFit fit_band(const FrfDataset& frf, const Band& band, const VfSettings& settings = {});

struct FitReport {
  std::vector<BandFit> bands;
  int merged_poles = 0;
  int iterations = 0;
  bool converged = false;
  double rel_error_first = 0.0;  ///< after the first full-range iteration; the starting error when none run
  double rel_error = 0.0;
};

struct FitResult {
  RationalModel model;
  FitReport report;
};

/// Band fits, pole merge, full-range iteration and final realization.
/// Throws UnstableModel if any final pole has Re >= 0.
FitResult fit_full(const FrfDataset& frf, const BandPlan& plan, const VfSettings& settings = {});

/// Runs the full-range iteration from a given starting pole set.
FitResult fit_from_poles(const FrfDataset& frf, const PoleSet& start, const VfSettings& settings = {});

/// (1/N) sqrt( sum ||H - Hfit||_F^2 / sum ||H||_F^2 ).
double rel_l2_error(const FrfDataset& frf, const RationalModel& model);
double rel_l2_error(const Eigen::MatrixXcd& data, const Eigen::MatrixXcd& fitted);

}  // namespace dispersim
