#pragma once

#include <vector>

#include <Eigen/Core>

namespace dispersim {

/// Wavenumber and group velocity sampled on a frequency grid. A bin is valid
/// when at least one estimate contributed to it (n_pairs > 0); invalid bins
/// carry NaN in k, v_group and spread.
struct DispersionCurve {
  Eigen::VectorXd freq_hz;
  Eigen::VectorXd k;        ///< 1/m
  Eigen::VectorXd v_group;  ///< m/s
  Eigen::VectorXd spread;   ///< robust std-dev of v_group across contributions
  Eigen::VectorXi n_pairs;
  /// Bins estimated from excitations whose spectrum reaches past the model's
  /// fitted band; reported but not trusted.
  std::vector<bool> flagged;

  Eigen::Index size() const { return freq_hz.size(); }
  bool valid(Eigen::Index i) const { return n_pairs[i] > 0; }
  void resize(Eigen::Index n);
};

}  // namespace dispersim
