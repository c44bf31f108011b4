#pragma once

// Artifact files. JSON forms of datasets and models store every double as a
// hex-float string ("0x1.8p+3") so they round-trip bit for bit; CSV forms use
// the shortest decimal that reads back to the same double. Every writer takes
// the resolved config text and embeds it (JSON: "config", CSV: "# config:" lines).

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "dispersim/curve.hpp"
#include "dispersim/dataset.hpp"
#include "dispersim/dispersion.hpp"
#include "dispersim/transient.hpp"
#include "dispersim/vecfit.hpp"

namespace dispersim {

using Json = nlohmann::ordered_json;

std::string hex_double(double v);
/// Accepts hex-float or decimal text, "nan", "inf", "-inf". Throws ValidationError.
double parse_double(const std::string& text);
/// Shortest decimal that round-trips.
std::string short_double(double v);

/// A fitted model with what it was fitted to.
struct ModelArtifact {
  RationalModel model;
  FitReport report;
  ExcitationMode excitation_mode = ExcitationMode::Flexural;
  BoundaryCondition bc_left = BoundaryCondition::Free;
  BoundaryCondition bc_right = BoundaryCondition::Free;
  Eigen::VectorXd locations;  ///< m, one per output
  double f_min_hz = 0.0;      ///< fitted range
  double f_max_hz = 0.0;
};

Json to_json(const FrfDataset& frf, const std::string& config = {});
FrfDataset frf_from_json(const Json& j);
void write_frf_csv(std::ostream& out, const FrfDataset& frf, const std::string& config = {});
FrfDataset read_frf_csv(std::istream& in);

Json to_json(const FitReport& report);
Json to_json(const ModelArtifact& artifact, const std::string& config = {});
ModelArtifact model_from_json(const Json& j);

Json to_json(const TransientRecord& record, const std::string& config = {});
void write_record_csv(std::ostream& out, const TransientRecord& record, const std::string& config = {});
Json to_json(const ProcessedWaveform& wf, const std::string& config = {});
/// Columns t, raw, processed; window bounds in the header.
void write_waveform_csv(std::ostream& out, const ProcessedWaveform& wf, const Eigen::VectorXd& raw,
                        const std::string& config = {});

Json to_json(const DispersionCurve& curve, const std::string& config = {});
DispersionCurve curve_from_json(const Json& j);
/// Valid bins only: freq_hz, k_per_m, vg_mps, spread_mps, n_pairs, flagged.
void write_curve_csv(std::ostream& out, const DispersionCurve& curve, const std::string& config = {});
DispersionCurve read_curve_csv(std::istream& in);

Json to_json(const ComparisonReport& report);

/// The "config" field of an artifact, or the "# config:" lines of a CSV.
std::string embedded_config(const Json& j);
std::string embedded_config_csv(std::istream& in);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace dispersim
