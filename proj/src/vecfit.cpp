#include "dispersim/vecfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dispersim/error.hpp"

namespace dispersim {

namespace {

constexpr cdouble kI{0.0, 1.0};

// Upper-triangular factor of a tall matrix fed in row blocks. Keeps only the
// n x n triangle, so memory stays O(n^2) however many rows arrive.
class RAccumulator {
 public:
  RAccumulator(Eigen::Index cols, Eigen::Index chunk_rows)
      : cols_(cols), buffer_(cols + chunk_rows, cols) {}

  Eigen::Index chunk_rows() const { return buffer_.rows() - cols_; }

  // Rows [filled_, filled_ + n) of buffer_ receive the next block.
  Eigen::Block<Eigen::MatrixXd> next_block(Eigen::Index n) {
    return buffer_.block(filled_, 0, n, cols_);
  }

  void commit(Eigen::Index n) {
    const Eigen::Index total = filled_ + n;
    auto active = buffer_.topRows(total);
    Eigen::HouseholderQR<Eigen::Ref<Eigen::MatrixXd>> qr(active);
    filled_ = std::min(total, cols_);
    Eigen::MatrixXd upper = active.topRows(filled_).triangularView<Eigen::Upper>();
    buffer_.topRows(filled_) = upper;
  }

  Eigen::MatrixXd r() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(cols_, cols_);
    out.topRows(filled_) = buffer_.topRows(filled_);
    return out;
  }

 private:
  Eigen::Index cols_;
  Eigen::Index filled_ = 0;
  Eigen::MatrixXd buffer_;
};

Eigen::Index chunk_for(Eigen::Index cols) { return std::max<Eigen::Index>(4 * cols, 2048); }

// Real-form partial-fraction basis evaluated at s = i omega, [N x r].
Eigen::MatrixXcd basis_matrix(const Eigen::VectorXd& omega, const PoleSet& poles) {
  const Eigen::Index n = omega.size();
  const Eigen::Index r = poles.size();
  Eigen::MatrixXcd phi(n, r);
  for (Eigen::Index m = 0; m < r;) {
    const cdouble p = poles[m];
    if (poles.is_pair_start(m)) {
      const cdouble pc = std::conj(p);
      for (Eigen::Index j = 0; j < n; ++j) {
        const cdouble s = kI * omega[j];
        const cdouble a = 1.0 / (s - p);
        const cdouble b = 1.0 / (s - pc);
        phi(j, m) = a + b;
        phi(j, m + 1) = kI * (a - b);
      }
      m += 2;
    } else {
      for (Eigen::Index j = 0; j < n; ++j) phi(j, m) = 1.0 / (kI * omega[j] - p);
      m += 1;
    }
  }
  return phi;
}

// Real-form coefficients -> complex residues attached to each pole.
Eigen::VectorXcd to_complex(const PoleSet& poles, const Eigen::VectorXd& coeff) {
  const Eigen::Index r = poles.size();
  Eigen::VectorXcd out(r);
  for (Eigen::Index m = 0; m < r;) {
    if (poles.is_pair_start(m)) {
      out[m] = cdouble(coeff[m], coeff[m + 1]);
      out[m + 1] = std::conj(out[m]);
      m += 2;
    } else {
      out[m] = coeff[m];
      m += 1;
    }
  }
  return out;
}

// Writes the real and imaginary parts of a complex row into two real rows.
template <typename Row>
void split_rows(Eigen::Block<Eigen::MatrixXd>& block, Eigen::Index row, Eigen::Index col,
                const Row& values) {
  block.row(2 * row).segment(col, values.size()) = values.real();
  block.row(2 * row + 1).segment(col, values.size()) = values.imag();
}

double max_relative_movement(const PoleSet& from, const PoleSet& to) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < to.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < from.size(); ++j)
      best = std::min(best, std::abs(to[i] - from[j]) / std::max(std::abs(from[j]), 1e-300));
    worst = std::max(worst, best);
  }
  return from.size() == to.size() ? worst : std::numeric_limits<double>::infinity();
}

double band_hz(const Eigen::VectorXd& omega, bool hi) {
  return (hi ? omega.maxCoeff() : omega.minCoeff()) / (2.0 * M_PI);
}

}  // namespace

// ---------------------------------------------------------------- PoleSet

PoleSet PoleSet::from_representatives(std::vector<cdouble> reps) {
  for (auto& p : reps) p = cdouble(p.real(), std::abs(p.imag()));
  std::sort(reps.begin(), reps.end(), [](cdouble a, cdouble b) {
    if (a.imag() != b.imag()) return a.imag() < b.imag();
    return a.real() < b.real();
  });
  std::vector<cdouble> full;
  full.reserve(2 * reps.size());
  for (cdouble p : reps) {
    full.push_back(p);
    if (p.imag() != 0.0) full.push_back(std::conj(p));
  }
  PoleSet out;
  out.poles_ = Eigen::Map<Eigen::VectorXcd>(full.data(), static_cast<Eigen::Index>(full.size()));
  return out;
}

std::vector<cdouble> PoleSet::representatives() const {
  std::vector<cdouble> reps;
  for (Eigen::Index i = 0; i < size(); ++i)
    if (poles_[i].imag() >= 0.0) reps.push_back(poles_[i]);
  return reps;
}

bool PoleSet::is_pair_start(Eigen::Index i) const { return poles_[i].imag() > 0.0; }

double PoleSet::max_real() const {
  double m = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < size(); ++i) m = std::max(m, poles_[i].real());
  return m;
}

double PoleSet::min_relative_separation() const {
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < size(); ++i)
    for (Eigen::Index j = i + 1; j < size(); ++j)
      m = std::min(m, std::abs(poles_[i] - poles_[j]) /
                          std::max({std::abs(poles_[i]), std::abs(poles_[j]), 1e-300}));
  return m;
}

// ---------------------------------------------------------------- model

Eigen::VectorXcd RationalModel::evaluate(cdouble s) const {
  const Eigen::VectorXcd inv = (s - poles.values().array()).inverse().matrix();
  return residues * inv;
}

Eigen::MatrixXcd RationalModel::evaluate_grid(const Eigen::VectorXd& omega) const {
  Eigen::MatrixXcd out(n_outputs(), omega.size());
  for (Eigen::Index j = 0; j < omega.size(); ++j) out.col(j) = evaluate(kI * omega[j]);
  return out;
}

Eigen::VectorXcd RationalModel::evaluate_state_space(cdouble s) const {
  const Eigen::Index r = order();
  const Eigen::MatrixXcd lhs = s * Eigen::MatrixXcd::Identity(r, r) - A.cast<cdouble>();
  const Eigen::VectorXcd x = lhs.partialPivLu().solve(B.cast<cdouble>());
  return C.cast<cdouble>() * x;
}

void realize(RationalModel& model) {
  const Eigen::Index r = model.order();
  const Eigen::Index q = model.residues.rows();
  model.A = Eigen::MatrixXd::Zero(r, r);
  model.B = Eigen::MatrixXd::Zero(r, 1);
  model.C = Eigen::MatrixXd::Zero(q, r);
  for (Eigen::Index m = 0; m < r;) {
    const cdouble p = model.poles[m];
    if (model.poles.is_pair_start(m)) {
      model.A(m, m) = p.real();
      model.A(m, m + 1) = p.imag();
      model.A(m + 1, m) = -p.imag();
      model.A(m + 1, m + 1) = p.real();
      model.B(m, 0) = 2.0;
      model.C.col(m) = model.residues.col(m).real();
      model.C.col(m + 1) = model.residues.col(m).imag();
      m += 2;
    } else {
      model.A(m, m) = p.real();
      model.B(m, 0) = 1.0;
      model.C.col(m) = model.residues.col(m).real();
      m += 1;
    }
  }
}

// ---------------------------------------------------------------- peaks

namespace {

// Local maxima of |H| in dB whose prominence on both sides, within the search
// window, reaches the threshold.
std::vector<double> magnitude_peaks(const FrfDataset& frf, const Eigen::VectorXd& mag, const PeakOptions& options) {
  const Eigen::Index n = mag.size();
  Eigen::VectorXd db(n);
  for (Eigen::Index i = 0; i < n; ++i) db[i] = 20.0 * std::log10(std::max(mag[i], 1e-300));

  std::vector<double> peaks;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    if (!(db[i] > db[i - 1] && db[i] >= db[i + 1])) continue;
    double left_min = db[i];
    for (Eigen::Index j = i - 1; j >= 0 && j >= i - options.window; --j) {
      if (db[j] > db[i]) break;
      left_min = std::min(left_min, db[j]);
    }
    double right_min = db[i];
    for (Eigen::Index j = i + 1; j < n && j <= i + options.window; ++j) {
      if (db[j] > db[i]) break;
      right_min = std::min(right_min, db[j]);
    }
    if (db[i] - std::max(left_min, right_min) >= options.min_prominence_db)
      peaks.push_back(frf.freq_grid[i] / (2.0 * M_PI));
  }
  return peaks;
}

}  // namespace

std::vector<double> detect_peaks(const FrfDataset& frf, const PeakOptions& options) {
  if (options.channel >= frf.n_channels())
    throw ValidationError("detect_peaks: channel out of range");
  if (options.channel >= 0)
    return magnitude_peaks(frf, frf.values.row(options.channel).cwiseAbs().transpose(), options);
  if (options.min_channels < 1 || frf.n_channels() < options.min_channels)
    return magnitude_peaks(frf, frf.values.cwiseAbs2().colwise().mean().cwiseSqrt().transpose(), options);

  // Per-channel peaks, clustered; a cluster seen on enough channels is one resonance.
  std::vector<double> all;
  for (Eigen::Index c = 0; c < frf.n_channels(); ++c) {
    const std::vector<double> p = magnitude_peaks(frf, frf.values.row(c).cwiseAbs().transpose(), options);
    all.insert(all.end(), p.begin(), p.end());
  }
  std::sort(all.begin(), all.end());
  std::vector<double> peaks;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j + 1 < all.size() && all[j + 1] - all[j] <= options.cluster_tolerance * all[j]) ++j;
    if (static_cast<int>(j - i + 1) >= options.min_channels) {
      const std::size_t m = i + (j - i) / 2;
      peaks.push_back((j - i) % 2 == 0 ? all[m] : 0.5 * (all[m] + all[m + 1]));
    }
    i = j + 1;
  }
  return peaks;
}

PoleSet init_poles(const std::vector<double>& peaks_hz) {
  std::vector<double> sorted = peaks_hz;
  std::sort(sorted.begin(), sorted.end());
  std::vector<cdouble> reps;
  double last = -1.0;
  for (double f : sorted) {
    if (!(f > 0.0)) throw ValidationError("init_poles: peak frequencies must be positive");
    if (last > 0.0 && std::abs(f - last) <= 1e-6 * f) continue;
    const double beta = 2.0 * M_PI * f;
    reps.emplace_back(-beta / 100.0, beta);
    last = f;
  }
  return PoleSet::from_representatives(reps);
}

Eigen::MatrixXd inverse_magnitude_weights(const Eigen::MatrixXcd& values, double floor) {
  Eigen::MatrixXd w(values.rows(), values.cols());
  for (Eigen::Index c = 0; c < values.rows(); ++c) {
    const Eigen::VectorXd mag = values.row(c).cwiseAbs().transpose();
    const double lo = floor * mag.maxCoeff();
    for (Eigen::Index j = 0; j < values.cols(); ++j)
      w(c, j) = 1.0 / std::max({mag[j], lo, std::numeric_limits<double>::min()});
  }
  return w;
}

// ---------------------------------------------------------------- iteration

BarycentricIterate vf_iterate(const Eigen::VectorXd& omega, const Eigen::MatrixXcd& values,
                              const PoleSet& poles, const Eigen::MatrixXd& weights,
                              double condition_limit) {
  const Eigen::Index n = omega.size();
  const Eigen::Index r = poles.size();
  const Eigen::Index q = values.rows();
  if (r == 0) throw ValidationError("vf_iterate: empty pole set");
  if (values.cols() != n || weights.rows() != q || weights.cols() != n)
    throw ValidationError("vf_iterate: data, weights and grid sizes disagree");
  if (n < r + 1) throw ValidationError("vf_iterate: need at least r+1 frequency samples");
  if (!(weights.minCoeff() > 0.0)) throw ValidationError("vf_iterate: weights must be positive");
  if (poles.min_relative_separation() <= 1e-9)
    throw ValidationError("vf_iterate: poles are not mutually distinct");

  const Eigen::MatrixXcd phi = basis_matrix(omega, poles);
  const Eigen::MatrixXd phi_abs2 = phi.cwiseAbs2();

  // psi unknowns are shared, so their column scaling must be channel-independent.
  Eigen::VectorXd psi_scale = Eigen::VectorXd::Zero(r);
  for (Eigen::Index c = 0; c < q; ++c) {
    const Eigen::VectorXd wh2 =
        (weights.row(c).transpose().array() * values.row(c).transpose().cwiseAbs().array()).square();
    psi_scale += phi_abs2.transpose() * wh2;
  }
  psi_scale = psi_scale.cwiseSqrt().cwiseMax(1e-300);

  const Eigen::Index cols = 2 * r + 1;
  const Eigen::Index chunk_freqs = chunk_for(cols) / 2;
  Eigen::MatrixXd stacked(q * r, r);
  Eigen::VectorXd stacked_rhs(q * r);
  std::vector<Eigen::MatrixXd> tops(static_cast<std::size_t>(q));
  std::vector<Eigen::VectorXd> phi_scales(static_cast<std::size_t>(q));

  for (Eigen::Index c = 0; c < q; ++c) {
    const Eigen::VectorXd w2 = weights.row(c).transpose().cwiseAbs2();
    Eigen::VectorXd phi_scale = (phi_abs2.transpose() * w2).cwiseSqrt().cwiseMax(1e-300);
    const Eigen::RowVectorXd inv_phi = phi_scale.cwiseInverse().transpose();
    const Eigen::RowVectorXd inv_psi = psi_scale.cwiseInverse().transpose();

    RAccumulator acc(cols, 2 * chunk_freqs);
    for (Eigen::Index start = 0; start < n; start += chunk_freqs) {
      const Eigen::Index len = std::min(chunk_freqs, n - start);
      auto block = acc.next_block(2 * len);
      for (Eigen::Index t = 0; t < len; ++t) {
        const Eigen::Index j = start + t;
        const double w = weights(c, j);
        const cdouble h = values(c, j);
        const Eigen::RowVectorXcd b = phi.row(j);
        split_rows(block, t, 0, (w * b.array() * inv_phi.array()).matrix());
        split_rows(block, t, r, (-w * h * b.array() * inv_psi.array()).matrix());
        block(2 * t, 2 * r) = (w * h).real();
        block(2 * t + 1, 2 * r) = (w * h).imag();
      }
      acc.commit(2 * len);
    }
    const Eigen::MatrixXd R = acc.r();
    stacked.middleRows(c * r, r) = R.block(r, r, r, r);
    stacked_rhs.segment(c * r, r) = R.block(r, 2 * r, r, 1);
    tops[c] = R.topRows(r);
    phi_scales[c] = std::move(phi_scale);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked);
  const auto diag = qr.matrixR().diagonal().cwiseAbs();
  const double condition = diag.minCoeff() > 0.0 ? diag.maxCoeff() / diag.minCoeff()
                                                  : std::numeric_limits<double>::infinity();
  if (!(condition <= condition_limit))
    throw IllConditionedFit("vector fitting least-squares system is ill-conditioned (cond " +
                                std::to_string(condition) + ")",
                            band_hz(omega, false), band_hz(omega, true));
  const Eigen::VectorXd psi_scaled = qr.solve(stacked_rhs);

  BarycentricIterate out;
  out.poles = poles;
  out.condition = condition;
  out.psi = to_complex(poles, psi_scaled.cwiseQuotient(psi_scale));
  out.phi.resize(q, r);
  for (Eigen::Index c = 0; c < q; ++c) {
    const Eigen::MatrixXd& top = tops[c];
    const Eigen::VectorXd rhs = top.col(2 * r) - top.block(0, r, r, r) * psi_scaled;
    const Eigen::VectorXd x =
        top.leftCols(r).triangularView<Eigen::Upper>().solve(rhs).cwiseQuotient(phi_scales[c]);
    out.phi.row(c) = to_complex(poles, x).transpose();
  }
  return out;
}

PoleSet relocate_poles(const BarycentricIterate& iterate) {
  const PoleSet& poles = iterate.poles;
  const Eigen::Index r = poles.size();
  RationalModel denominator;
  denominator.poles = poles;
  denominator.residues = iterate.psi.transpose();
  realize(denominator);
  const Eigen::MatrixXd zeros_matrix = denominator.A - denominator.B * denominator.C;

  Eigen::EigenSolver<Eigen::MatrixXd> eig(zeros_matrix, false);
  if (eig.info() != Eigen::Success) throw NumericalError("pole relocation eigensolver failed");
  std::vector<cdouble> reps;
  for (Eigen::Index i = 0; i < r; ++i) {
    cdouble z = eig.eigenvalues()[i];
    if (z.imag() < 0.0) continue;
    if (z.real() > 0.0) z = cdouble(-z.real(), z.imag());
    reps.push_back(z);
  }
  return PoleSet::from_representatives(reps);
}

RationalModel fit_residues(const Eigen::VectorXd& omega, const Eigen::MatrixXcd& values,
                           const PoleSet& poles, const Eigen::MatrixXd& weights) {
  const Eigen::Index n = omega.size();
  const Eigen::Index r = poles.size();
  const Eigen::Index q = values.rows();
  const Eigen::MatrixXcd phi = basis_matrix(omega, poles);
  const Eigen::MatrixXd phi_abs2 = phi.cwiseAbs2();
  const Eigen::Index cols = r + 1;
  const Eigen::Index chunk_freqs = chunk_for(cols) / 2;

  RationalModel model;
  model.poles = poles;
  model.residues.resize(q, r);
  for (Eigen::Index c = 0; c < q; ++c) {
    const Eigen::VectorXd scale =
        (phi_abs2.transpose() * weights.row(c).transpose().cwiseAbs2()).cwiseSqrt().cwiseMax(1e-300);
    const Eigen::RowVectorXd inv = scale.cwiseInverse().transpose();
    RAccumulator acc(cols, 2 * chunk_freqs);
    for (Eigen::Index start = 0; start < n; start += chunk_freqs) {
      const Eigen::Index len = std::min(chunk_freqs, n - start);
      auto block = acc.next_block(2 * len);
      for (Eigen::Index t = 0; t < len; ++t) {
        const Eigen::Index j = start + t;
        const double w = weights(c, j);
        split_rows(block, t, 0, (w * phi.row(j).array() * inv.array()).matrix());
        block(2 * t, r) = (w * values(c, j)).real();
        block(2 * t + 1, r) = (w * values(c, j)).imag();
      }
      acc.commit(2 * len);
    }
    const Eigen::MatrixXd R = acc.r();
    const Eigen::VectorXd x = R.topLeftCorner(r, r)
                                  .triangularView<Eigen::Upper>()
                                  .solve(R.col(r).head(r))
                                  .cwiseQuotient(scale);
    model.residues.row(c) = to_complex(poles, x).transpose();
  }
  realize(model);
  return model;
}

double rel_l2_error(const Eigen::MatrixXcd& data, const Eigen::MatrixXcd& fitted) {
  const double num = (data - fitted).squaredNorm();
  const double den = data.squaredNorm();
  return std::sqrt(num / den) / static_cast<double>(data.cols());
}

double rel_l2_error(const FrfDataset& frf, const RationalModel& model) {
  return rel_l2_error(frf.values, model.evaluate_grid(frf.freq_grid));
}

// ---------------------------------------------------------------- bands

void BandPlan::validate(double f_min_hz, double f_max_hz) const {
  if (bands.empty()) throw ValidationError("band plan is empty");
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const Band& b = bands[i];
    if (!(b.f_hi_hz > b.f_lo_hz)) throw ValidationError("band " + std::to_string(i + 1) + " is empty");
    if (b.pole_budget < 2) throw ValidationError("band pole budget must be >= 2");
    if (i > 0 && std::abs(b.f_lo_hz - bands[i - 1].f_hi_hz) > 1e-9 * b.f_lo_hz)
      throw ValidationError("bands must be contiguous and non-overlapping");
  }
  if (bands.front().f_lo_hz > f_min_hz * (1.0 + 1e-9) || bands.back().f_hi_hz < f_max_hz * (1.0 - 1e-9))
    throw ValidationError("band plan does not cover the frequency grid");
}

BandPlan default_flexural_plan() {
  return BandPlan{{{10.0, 1000.0, 28},
                   {1000.0, 5000.0, 40},
                   {5000.0, 10000.0, 32},
                   {10000.0, 20000.0, 44},
                   {20000.0, 30000.0, 38},
                   {30000.0, 40000.0, 30},
                   {40000.0, 50000.0, 26}}};
}

BandPlan default_longitudinal_plan(double f_min_hz, double f_max_hz) {
  return BandPlan{{{f_min_hz, f_max_hz, 48}}};
}

namespace {

struct IterationOutcome {
  PoleSet poles;
  int iterations = 0;
  bool converged = false;
  double rel_error = 0.0;
  double rel_error_first = 0.0;
  RationalModel model;
};

// Repeated {vf_iterate, relocate_poles}; keeps the iterate with the lowest
// rel_l2_error, the starting poles included, so the result never deteriorates.
IterationOutcome iterate_poles(const FrfDataset& data, PoleSet poles, const Eigen::MatrixXd& weights,
                               int max_iterations, const VfSettings& s) {
  IterationOutcome best;
  best.poles = poles;
  best.model = fit_residues(data.freq_grid, data.values, poles, weights);
  best.rel_error = rel_l2_error(data, best.model);
  best.rel_error_first = best.rel_error;
  for (int it = 1; it <= max_iterations; ++it) {
    const BarycentricIterate step = vf_iterate(data.freq_grid, data.values, poles, weights, s.condition_limit);
    const PoleSet next = relocate_poles(step);
    const double movement = max_relative_movement(poles, next);
    poles = next;
    RationalModel model = fit_residues(data.freq_grid, data.values, poles, weights);
    const double err = rel_l2_error(data, model);
    if (it == 1) best.rel_error_first = err;
    if (err <= best.rel_error) {
      best.rel_error = err;
      best.poles = poles;
      best.model = std::move(model);
    }
    best.iterations = it;
    if (movement < s.tolerance) {
      best.converged = true;
      break;
    }
  }
  return best;
}

}  // namespace

namespace {

BandFit fit_band_with_guards(const FrfDataset& slice, const Band& band, const VfSettings& settings, int guards) {
  BandFit out;
  out.band = band;
  out.peaks_hz = detect_peaks(slice, settings.peaks);
  std::vector<cdouble> reps = init_poles(out.peaks_hz).representatives();

  const int budget = std::max<int>(band.pole_budget, 2 * static_cast<int>(reps.size()));
  out.band.pole_budget = budget;
  const int pads = (budget - 2 * static_cast<int>(reps.size()) + 1) / 2;
  const double lo = std::max(band.f_lo_hz, slice.freq_grid[0] / (2.0 * M_PI));
  const double hi = band.f_hi_hz;
  // Padding pairs go, one at a time, into the widest remaining (log) gap.
  std::vector<double> marks{std::log(lo), std::log(hi)};
  for (cdouble p : reps) marks.push_back(std::log(p.imag() / (2.0 * M_PI)));
  for (int k = 0; k < pads; ++k) {
    std::sort(marks.begin(), marks.end());
    std::size_t widest = 0;
    for (std::size_t i = 1; i + 1 < marks.size(); ++i)
      if (marks[i + 1] - marks[i] > marks[widest + 1] - marks[widest]) widest = i;
    const double mid = 0.5 * (marks[widest] + marks[widest + 1]);
    const double beta = 2.0 * M_PI * std::exp(mid);
    reps.emplace_back(-beta / 100.0, beta);
    marks.push_back(mid);
  }
  for (int g = 1; g <= guards; ++g) {
    for (double f : {lo * std::pow(0.5, g), hi * std::pow(1.25, g)}) {
      const double beta = 2.0 * M_PI * f;
      reps.emplace_back(-beta / 100.0, beta);
    }
  }
  out.initial_poles = PoleSet::from_representatives(reps);

  const Eigen::MatrixXd weights = settings.inverse_weighting
                                      ? inverse_magnitude_weights(slice.values, settings.weight_floor)
                                      : Eigen::MatrixXd::Ones(slice.n_channels(), slice.n_freq());
  IterationOutcome result = iterate_poles(slice, out.initial_poles, weights, settings.max_iterations, settings);
  out.poles = result.poles;
  out.iterations = result.iterations;
  out.converged = result.converged;
  out.rel_error = result.rel_error;
  return out;
}

}  // namespace

BandFit fit_band(const FrfDataset& frf, const Band& band, const VfSettings& settings) {
  const FrfDataset slice = frf.slice_hz(band.f_lo_hz, band.f_hi_hz);
  if (slice.n_freq() < 4) throw ValidationError("band has too few frequency samples");
  if (settings.guard_pairs == 0) return fit_band_with_guards(slice, band, settings, 0);
  // Data that needs no out-of-band poles makes the guards redundant and the
  // system singular; such bands are refitted without them.
  try {
    return fit_band_with_guards(slice, band, settings, settings.guard_pairs);
  } catch (const IllConditionedFit&) {
    return fit_band_with_guards(slice, band, settings, 0);
  }
}

FitResult fit_from_poles(const FrfDataset& frf, const PoleSet& start, const VfSettings& settings) {
  frf.validate();
  const Eigen::MatrixXd weights = settings.inverse_weighting
                                      ? inverse_magnitude_weights(frf.values, settings.weight_floor)
                                      : Eigen::MatrixXd::Ones(frf.n_channels(), frf.n_freq());
  IterationOutcome result = iterate_poles(frf, start, weights, settings.max_full_iterations, settings);
  if (result.poles.max_real() >= 0.0) {
    std::string list;
    for (cdouble p : result.poles.representatives())
      if (p.real() >= 0.0) list += " (" + std::to_string(p.real()) + "," + std::to_string(p.imag()) + ")";
    throw UnstableModel("fitted model has unstable poles:" + list);
  }
  FitResult out;
  out.model = std::move(result.model);
  out.report.merged_poles = static_cast<int>(start.size());
  out.report.iterations = result.iterations;
  out.report.converged = result.converged;
  out.report.rel_error_first = result.rel_error_first;
  out.report.rel_error = result.rel_error;
  return out;
}

FitResult fit_full(const FrfDataset& frf, const BandPlan& plan, const VfSettings& settings) {
  frf.validate();
  plan.validate(frf.freq_grid[0] / (2.0 * M_PI), frf.freq_grid[frf.n_freq() - 1] / (2.0 * M_PI));

  std::vector<BandFit> band_fits;
  std::vector<cdouble> merged;
  for (std::size_t b = 0; b < plan.bands.size(); ++b) {
    BandFit fit = fit_band(frf, plan.bands[b], settings);
    // Guard poles that stayed outside their band are dropped here.
    const bool last = b + 1 == plan.bands.size();
    const double lo = 2.0 * M_PI * plan.bands[b].f_lo_hz;
    const double hi = 2.0 * M_PI * plan.bands[b].f_hi_hz;
    for (cdouble p : fit.poles.representatives()) {
      if (p.imag() < lo || p.imag() > hi || (p.imag() == hi && !last)) continue;
      const bool duplicate = std::any_of(merged.begin(), merged.end(), [&](cdouble q) {
        return std::abs(p - q) <= settings.dedupe_tolerance * std::abs(q);
      });
      if (!duplicate) merged.push_back(p);
    }
    band_fits.push_back(std::move(fit));
  }

  FitResult out = fit_from_poles(frf, PoleSet::from_representatives(merged), settings);
  out.report.bands = std::move(band_fits);
  return out;
}

}  // namespace dispersim
