#pragma once

// Scenario configuration: a small TOML subset.
//
//   # comment
//   [section]            sections may be dotted: [bands.flexural]
//   key = 1.5            numbers
//   key = "48 in"        strings; quantities carry an optional unit
//   key = true           booleans
//   key = [1, "2 in"]    flat arrays of numbers and strings
//
// Quantities without a unit are SI. Recognised units: m, cm, mm, in, ft;
// Pa, kPa, MPa, GPa; kg/m^3, g/cm^3; Hz, kHz, MHz; s, ms, us.
// Unknown sections or keys are errors.

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "dispersim/dispersion.hpp"
#include "dispersim/vecfit.hpp"
#include "dispersim/waveguide.hpp"

namespace dispersim {

struct TomlValue {
  std::variant<double, std::string, bool, std::vector<std::variant<double, std::string>>> value;
  int line = 0;
};

/// section -> key -> value (sections and keys sorted by name).
using TomlDocument = std::map<std::string, std::map<std::string, TomlValue>>;

/// Throws ValidationError with the line number on syntax errors.
TomlDocument parse_toml(const std::string& text);

/// "48 in" -> 1.2192. `dimension` is one of "length", "pressure", "density",
/// "frequency", "time" or "" (plain number).
double parse_quantity(const std::string& text, const std::string& dimension);

struct BurstSettings {
  double sample_rate = 1e6;
  int cycles_flexural = 2;
  int cycles_longitudinal = 1;
  double kappa_flexural = 1.5;
  double kappa_longitudinal = 1.2;
  double gamma = 0.0;  ///< 0: 10 / T_b
  double follow_fraction = 0.05;
};

struct SweepSettings {
  double start_hz_flexural = 2000.0;
  double stop_hz_flexural = 48000.0;
  double start_hz_longitudinal = 2000.0;
  double stop_hz_longitudinal = 45000.0;
  double step_hz = 1000.0;
  double duration = 4e-3;
  double threshold = 0.2;
  double f_min_hz = 2000.0;
  double flag_above_hz = 45000.0;
  int min_pairs = 3;
  bool isolated_only = true;
  double band_limit_hz = 0.0;  ///< 0: top of the model's fitted range
  double compare_lo_hz = 2000.0;
  double compare_hi_hz = 40000.0;
};

struct ScenarioConfig {
  std::string name = "reference";
  WaveguideSpec beam = reference_beam();  ///< excitation_mode is set per run from `modes`
  std::vector<ExcitationMode> modes{ExcitationMode::Flexural};
  double grid_start_hz = 10.0;
  double grid_stop_hz = 50000.0;
  double grid_resolution_hz = 2.0;
  double paper_resolution_hz = 0.25;
  BandPlan flexural_plan = default_flexural_plan();
  BandPlan longitudinal_plan = default_longitudinal_plan();
  VfSettings vf;
  BurstSettings burst;
  SweepSettings sweep;
  std::string output_dir = "out";

  WaveguideSpec spec(ExcitationMode mode) const;
  const BandPlan& plan(ExcitationMode mode) const;
  SweepOptions sweep_options(ExcitationMode mode, double model_f_max_hz) const;
  /// Short tag used in file names, e.g. "flexural_free-free".
  std::string tag(ExcitationMode mode) const;
  void validate() const;
};

/// Parses and validates. Throws ValidationError naming the offending field.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical TOML text of a resolved config; parse_config() of it gives the same config.
std::string to_toml(const ScenarioConfig& config);

}  // namespace dispersim
