#pragma once

// Command implementations behind the dispersim CLI. Each command reads and
// writes artifacts in an output directory; file names carry the scenario tag,
// e.g. model_flexural_free-free.json.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dispersim/config.hpp"
#include "dispersim/io.hpp"

namespace dispersim {

struct RunOptions {
  std::filesystem::path out_dir;  ///< empty: the config's output_dir
  bool paper_grid = false;        ///< use the config's paper resolution
  std::ostream* log = nullptr;    ///< progress and timing; nullptr for silence
};

/// One pass/fail line of a reproduction summary.
struct Check {
  std::string name;
  double value = 0.0;
  std::string limit;
  bool passed = false;
};

struct Summary {
  std::string id;
  std::vector<Check> checks;
  std::vector<std::filesystem::path> files;
  bool passed() const;
};

FrfDataset synthesize(const ScenarioConfig& config, ExcitationMode mode, bool paper_grid = false);
ModelArtifact fit_dataset(const FrfDataset& frf, const ScenarioConfig& config);
/// Refuses (ValidationError) when the sweep reaches outside the model's fitted range.
DispersionCurve estimate_dispersion(const ModelArtifact& model, const ScenarioConfig& config);
/// Analytic group velocity of the mode excited by `mode`, on the curve's bins.
DispersionCurve oracle_curve(const ScenarioConfig& config, ExcitationMode mode, const Eigen::VectorXd& freq_hz);
/// Table 1 layout: band, range, resonant peaks, poles, E_rel.
std::string fit_table(const ModelArtifact& model);

Summary cmd_synth(const ScenarioConfig& config, const RunOptions& options);
Summary cmd_fit(const ScenarioConfig& config, const RunOptions& options);
Summary cmd_dispersion(const ScenarioConfig& config, const RunOptions& options);
/// id in {table1, table2, fig4, fig6, fig8}; artifacts go to <out>/<id>/.
Summary cmd_reproduce(const std::string& id, const ScenarioConfig& config, const RunOptions& options);

std::string format_summary(const Summary& summary);

}  // namespace dispersim
