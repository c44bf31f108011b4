#include "dispersim/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "dispersim/error.hpp"

namespace dispersim {

namespace {

constexpr const char* kFrfFormat = "dispersim-frf-1";
constexpr const char* kModelFormat = "dispersim-model-1";
constexpr const char* kCurveFormat = "dispersim-curve-1";

Json hex_vector(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(hex_double(v[i]));
  return out;
}

Eigen::VectorXd vector_from(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& e = j[i];
    v[static_cast<Eigen::Index>(i)] =
        e.is_string() ? parse_double(e.get<std::string>()) : e.is_null() ? std::nan("") : e.get<double>();
  }
  return v;
}

Json hex_complex(cdouble z) { return Json::array({hex_double(z.real()), hex_double(z.imag())}); }

cdouble complex_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("complex value must be [re, im]");
  return {parse_double(j[0].get<std::string>()), parse_double(j[1].get<std::string>())};
}

Json hex_matrix(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(hex_vector(m.row(r).transpose()));
  return out;
}

Eigen::MatrixXd matrix_from(const Json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Eigen::VectorXd row = vector_from(j[r]);
    if (row.size() != cols) throw ValidationError("matrix rows have inconsistent lengths");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

// Decimal JSON number, null for NaN/Inf.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

void write_config_lines(std::ostream& out, const std::string& config) {
  std::istringstream lines(config);
  std::string line;
  while (std::getline(lines, line)) out << "# config: " << line << '\n';
}

const Json& field(const Json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

void expect_format(const Json& j, const char* format) {
  if (!j.is_object() || !j.contains("format") || j["format"] != format)
    throw ValidationError(std::string("not a ") + format + " document");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// Reads "# key: value" header lines and returns the first data line (the column header).
std::string read_header(std::istream& in, std::map<std::string, std::string>& meta) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) != 0) return line;
    const auto colon = line.find(": ");
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(2, colon - 2);
    if (key != "config") meta[key] = line.substr(colon + 2);
  }
  return {};
}

}  // namespace

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw ValidationError("not a number: \"" + text + "\"");
  return v;
}

std::string short_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json to_json(const FrfDataset& frf, const std::string& config) {
  Json j;
  j["format"] = kFrfFormat;
  j["excitation_mode"] = to_string(frf.excitation_mode);
  j["bc_left"] = to_string(frf.bc_left);
  j["bc_right"] = to_string(frf.bc_right);
  j["resolution_hz"] = hex_double(frf.resolution_hz);
  j["units"] = {{"omega", "rad/s"}, {"locations", "m"}, {"values", "m/N"}};
  j["omega"] = hex_vector(frf.freq_grid);
  j["locations"] = hex_vector(frf.locations);
  Json channels = Json::array();
  for (Eigen::Index c = 0; c < frf.n_channels(); ++c) {
    Json re = Json::array(), im = Json::array();
    for (Eigen::Index i = 0; i < frf.n_freq(); ++i) {
      re.push_back(hex_double(frf.values(c, i).real()));
      im.push_back(hex_double(frf.values(c, i).imag()));
    }
    channels.push_back({{"re", std::move(re)}, {"im", std::move(im)}});
  }
  j["values"] = std::move(channels);
  j["config"] = config;
  return j;
}

FrfDataset frf_from_json(const Json& j) {
  expect_format(j, kFrfFormat);
  FrfDataset frf;
  frf.excitation_mode = parse_excitation_mode(field(j, "excitation_mode").get<std::string>());
  frf.bc_left = parse_boundary_condition(field(j, "bc_left").get<std::string>());
  frf.bc_right = parse_boundary_condition(field(j, "bc_right").get<std::string>());
  frf.resolution_hz = parse_double(field(j, "resolution_hz").get<std::string>());
  frf.freq_grid = vector_from(field(j, "omega"));
  frf.locations = vector_from(field(j, "locations"));
  const Json& channels = field(j, "values");
  frf.values.resize(static_cast<Eigen::Index>(channels.size()), frf.freq_grid.size());
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const Eigen::VectorXd re = vector_from(field(channels[c], "re"));
    const Eigen::VectorXd im = vector_from(field(channels[c], "im"));
    if (re.size() != frf.freq_grid.size() || im.size() != frf.freq_grid.size())
      throw ValidationError("FRF channel " + std::to_string(c) + " length does not match the grid");
    for (Eigen::Index i = 0; i < re.size(); ++i)
      frf.values(static_cast<Eigen::Index>(c), i) = cdouble(re[i], im[i]);
  }
  frf.validate();
  return frf;
}

void write_frf_csv(std::ostream& out, const FrfDataset& frf, const std::string& config) {
  out << "# format: " << kFrfFormat << '\n'
      << "# excitation_mode: " << to_string(frf.excitation_mode) << '\n'
      << "# bc_left: " << to_string(frf.bc_left) << '\n'
      << "# bc_right: " << to_string(frf.bc_right) << '\n'
      << "# resolution_hz: " << short_double(frf.resolution_hz) << '\n'
      << "# units: freq_hz Hz, loc_m m, re im m/N\n";
  write_config_lines(out, config);
  out << "freq_hz,loc_m,re,im\n";
  std::string row;
  for (Eigen::Index c = 0; c < frf.n_channels(); ++c) {
    const std::string loc = short_double(frf.locations[c]);
    for (Eigen::Index i = 0; i < frf.n_freq(); ++i) {
      row = short_double(frf.freq_grid[i] / (2.0 * M_PI));
      row += ',';
      row += loc;
      row += ',';
      row += short_double(frf.values(c, i).real());
      row += ',';
      row += short_double(frf.values(c, i).imag());
      row += '\n';
      out << row;
    }
  }
}

FrfDataset read_frf_csv(std::istream& in) {
  std::map<std::string, std::string> meta;
  const std::string header = read_header(in, meta);
  if (header != "freq_hz,loc_m,re,im") throw ValidationError("FRF CSV: unexpected column header \"" + header + "\"");
  FrfDataset frf;
  try {
    frf.excitation_mode = parse_excitation_mode(meta.at("excitation_mode"));
    frf.bc_left = parse_boundary_condition(meta.at("bc_left"));
    frf.bc_right = parse_boundary_condition(meta.at("bc_right"));
    frf.resolution_hz = parse_double(meta.at("resolution_hz"));
  } catch (const std::out_of_range&) {
    throw ValidationError("FRF CSV: missing metadata header line");
  }
  std::vector<double> freqs, locs;
  std::vector<std::vector<cdouble>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw ValidationError("FRF CSV: expected 4 columns in \"" + line + "\"");
    const double f = parse_double(cells[0]);
    const double loc = parse_double(cells[1]);
    if (locs.empty() || loc != locs.back()) {
      locs.push_back(loc);
      rows.emplace_back();
    }
    if (locs.size() == 1) freqs.push_back(f);
    rows.back().emplace_back(parse_double(cells[2]), parse_double(cells[3]));
  }
  frf.freq_grid.resize(static_cast<Eigen::Index>(freqs.size()));
  for (std::size_t i = 0; i < freqs.size(); ++i) frf.freq_grid[static_cast<Eigen::Index>(i)] = 2.0 * M_PI * freqs[i];
  frf.locations = Eigen::Map<const Eigen::VectorXd>(locs.data(), static_cast<Eigen::Index>(locs.size()));
  frf.values.resize(frf.locations.size(), frf.freq_grid.size());
  for (std::size_t c = 0; c < rows.size(); ++c) {
    if (rows[c].size() != freqs.size()) throw ValidationError("FRF CSV: channels have different lengths");
    for (std::size_t i = 0; i < freqs.size(); ++i)
      frf.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = rows[c][i];
  }
  frf.validate();
  return frf;
}

Json to_json(const FitReport& report) {
  Json bands = Json::array();
  for (std::size_t b = 0; b < report.bands.size(); ++b) {
    const BandFit& fit = report.bands[b];
    bands.push_back({{"band", b + 1},
                     {"f_lo_hz", fit.band.f_lo_hz},
                     {"f_hi_hz", fit.band.f_hi_hz},
                     {"resonant_peaks", fit.peaks_hz.size()},
                     {"poles", fit.poles.size()},
                     {"pole_budget", fit.band.pole_budget},
                     {"iterations", fit.iterations},
                     {"converged", fit.converged},
                     {"rel_error", number(fit.rel_error)}});
  }
  return {{"bands", std::move(bands)},
          {"merged_poles", report.merged_poles},
          {"iterations", report.iterations},
          {"converged", report.converged},
          {"rel_error_first", number(report.rel_error_first)},
          {"rel_error", number(report.rel_error)}};
}

Json to_json(const ModelArtifact& a, const std::string& config) {
  const RationalModel& m = a.model;
  Json j;
  j["format"] = kModelFormat;
  j["excitation_mode"] = to_string(a.excitation_mode);
  j["bc_left"] = to_string(a.bc_left);
  j["bc_right"] = to_string(a.bc_right);
  j["f_min_hz"] = hex_double(a.f_min_hz);
  j["f_max_hz"] = hex_double(a.f_max_hz);
  j["locations"] = hex_vector(a.locations);
  j["order"] = m.order();
  j["n_outputs"] = m.n_outputs();
  Json poles = Json::array();
  for (Eigen::Index i = 0; i < m.order(); ++i) poles.push_back(hex_complex(m.poles[i]));
  j["poles"] = std::move(poles);
  Json residues = Json::array();
  for (Eigen::Index c = 0; c < m.n_outputs(); ++c) {
    Json row = Json::array();
    for (Eigen::Index i = 0; i < m.order(); ++i) row.push_back(hex_complex(m.residues(c, i)));
    residues.push_back(std::move(row));
  }
  j["residues"] = std::move(residues);
  j["A"] = hex_matrix(m.A);
  j["B"] = hex_matrix(m.B);
  j["C"] = hex_matrix(m.C);
  j["fit"] = to_json(a.report);
  j["config"] = config;
  return j;
}

ModelArtifact model_from_json(const Json& j) {
  expect_format(j, kModelFormat);
  ModelArtifact a;
  a.excitation_mode = parse_excitation_mode(field(j, "excitation_mode").get<std::string>());
  a.bc_left = parse_boundary_condition(field(j, "bc_left").get<std::string>());
  a.bc_right = parse_boundary_condition(field(j, "bc_right").get<std::string>());
  a.f_min_hz = parse_double(field(j, "f_min_hz").get<std::string>());
  a.f_max_hz = parse_double(field(j, "f_max_hz").get<std::string>());
  a.locations = vector_from(field(j, "locations"));

  const Json& poles = field(j, "poles");
  std::vector<cdouble> stored;
  for (const Json& p : poles) stored.push_back(complex_from(p));
  std::vector<cdouble> reps;
  for (cdouble p : stored)
    if (p.imag() >= 0.0) reps.push_back(p);
  RationalModel& m = a.model;
  m.poles = PoleSet::from_representatives(reps);
  if (m.poles.size() != static_cast<Eigen::Index>(stored.size()))
    throw ValidationError("model poles are not closed under conjugation");
  for (std::size_t i = 0; i < stored.size(); ++i)
    if (m.poles[static_cast<Eigen::Index>(i)] != stored[i])
      throw ValidationError("model poles are not in canonical order");

  const Json& residues = field(j, "residues");
  const Eigen::Index r = m.poles.size();
  m.residues.resize(static_cast<Eigen::Index>(residues.size()), r);
  for (std::size_t c = 0; c < residues.size(); ++c) {
    if (static_cast<Eigen::Index>(residues[c].size()) != r)
      throw ValidationError("model residue row " + std::to_string(c) + " has the wrong length");
    for (Eigen::Index i = 0; i < r; ++i)
      m.residues(static_cast<Eigen::Index>(c), i) = complex_from(residues[c][static_cast<std::size_t>(i)]);
  }
  m.A = matrix_from(field(j, "A"), r);
  m.B = matrix_from(field(j, "B"), 1);
  m.C = matrix_from(field(j, "C"), r);
  if (m.A.rows() != r || m.B.rows() != r || m.C.rows() != m.n_outputs())
    throw ValidationError("model realization shapes do not match the pole set");
  if (a.locations.size() != m.n_outputs())
    throw ValidationError("model needs one location per output");

  if (j.contains("fit")) {
    const Json& fit = j["fit"];
    for (const Json& b : fit.value("bands", Json::array())) {
      BandFit bf;
      bf.band = Band{b.value("f_lo_hz", 0.0), b.value("f_hi_hz", 0.0), b.value("pole_budget", 0)};
      bf.peaks_hz.resize(b.value("resonant_peaks", std::size_t{0}));
      bf.iterations = b.value("iterations", 0);
      bf.converged = b.value("converged", false);
      bf.rel_error = b["rel_error"].is_number() ? b["rel_error"].get<double>() : std::nan("");
      a.report.bands.push_back(std::move(bf));
    }
    a.report.merged_poles = fit.value("merged_poles", 0);
    a.report.iterations = fit.value("iterations", 0);
    a.report.converged = fit.value("converged", false);
    a.report.rel_error_first = fit["rel_error_first"].is_number() ? fit["rel_error_first"].get<double>() : 0.0;
    a.report.rel_error = fit["rel_error"].is_number() ? fit["rel_error"].get<double>() : 0.0;
  }
  return a;
}

Json to_json(const TransientRecord& record, const std::string& config) {
  Json channels = Json::array();
  for (Eigen::Index c = 0; c < record.channels.rows(); ++c) {
    Json row = Json::array();
    for (Eigen::Index i = 0; i < record.n_samples(); ++i) row.push_back(record.channels(c, i));
    channels.push_back(std::move(row));
  }
  return {{"format", "dispersim-transient-1"},
          {"center_hz", record.excitation.center_hz},
          {"n_cycles", record.excitation.n_cycles},
          {"sample_rate", record.sample_rate()},
          {"padded_samples", record.padded_samples},
          {"t0", record.n_samples() > 0 ? record.time[0] : 0.0},
          {"channels", std::move(channels)},
          {"config", config}};
}

void write_record_csv(std::ostream& out, const TransientRecord& record, const std::string& config) {
  out << "# format: dispersim-transient-1\n"
      << "# center_hz: " << short_double(record.excitation.center_hz) << '\n'
      << "# n_cycles: " << record.excitation.n_cycles << '\n';
  write_config_lines(out, config);
  out << 't';
  for (Eigen::Index c = 0; c < record.channels.rows(); ++c) out << ",ch_" << c + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < record.n_samples(); ++i) {
    out << short_double(record.time[i]);
    for (Eigen::Index c = 0; c < record.channels.rows(); ++c) out << ',' << short_double(record.channels(c, i));
    out << '\n';
  }
}

Json to_json(const ProcessedWaveform& wf, const std::string& config) {
  Json samples = Json::array();
  for (Eigen::Index i = 0; i < wf.samples.size(); ++i) samples.push_back(wf.samples[i]);
  return {{"format", "dispersim-waveform-1"},
          {"center_hz", wf.center_hz},
          {"n_cycles", wf.n_cycles},
          {"t_lo", wf.t_lo},
          {"t_hi", wf.t_hi},
          {"t_peak", wf.t_peak},
          {"truncated", wf.truncated},
          {"isolated", wf.isolated},
          {"t0", wf.time.size() > 0 ? wf.time[0] : 0.0},
          {"dt", wf.time.size() > 1 ? wf.time[1] - wf.time[0] : 0.0},
          {"samples", std::move(samples)},
          {"config", config}};
}

void write_waveform_csv(std::ostream& out, const ProcessedWaveform& wf, const Eigen::VectorXd& raw,
                        const std::string& config) {
  if (raw.size() != wf.samples.size()) throw ValidationError("raw and processed waveforms differ in length");
  out << "# format: dispersim-waveform-1\n"
      << "# center_hz: " << short_double(wf.center_hz) << '\n'
      << "# t_lo: " << short_double(wf.t_lo) << '\n'
      << "# t_hi: " << short_double(wf.t_hi) << '\n'
      << "# t_peak: " << short_double(wf.t_peak) << '\n'
      << "# truncated: " << (wf.truncated ? "true" : "false") << '\n';
  write_config_lines(out, config);
  out << "t,raw,processed\n";
  for (Eigen::Index i = 0; i < wf.samples.size(); ++i)
    out << short_double(wf.time[i]) << ',' << short_double(raw[i]) << ',' << short_double(wf.samples[i]) << '\n';
}

Json to_json(const DispersionCurve& curve, const std::string& config) {
  Json f = Json::array(), k = Json::array(), v = Json::array(), s = Json::array(), n = Json::array(),
       flag = Json::array();
  for (Eigen::Index i = 0; i < curve.size(); ++i) {
    f.push_back(curve.freq_hz[i]);
    k.push_back(number(curve.k[i]));
    v.push_back(number(curve.v_group[i]));
    s.push_back(number(curve.spread[i]));
    n.push_back(curve.n_pairs[i]);
    flag.push_back(static_cast<bool>(curve.flagged[static_cast<std::size_t>(i)]));
  }
  return {{"format", kCurveFormat},
          {"units", {{"freq", "Hz"}, {"k", "1/m"}, {"v_group", "m/s"}, {"spread", "m/s"}}},
          {"freq_hz", std::move(f)},
          {"k_per_m", std::move(k)},
          {"vg_mps", std::move(v)},
          {"spread_mps", std::move(s)},
          {"n_pairs", std::move(n)},
          {"flagged", std::move(flag)},
          {"config", config}};
}

DispersionCurve curve_from_json(const Json& j) {
  expect_format(j, kCurveFormat);
  DispersionCurve c;
  const Eigen::VectorXd f = vector_from(field(j, "freq_hz"));
  c.resize(f.size());
  c.freq_hz = f;
  c.k = vector_from(field(j, "k_per_m"));
  c.v_group = vector_from(field(j, "vg_mps"));
  c.spread = vector_from(field(j, "spread_mps"));
  const Json& n = field(j, "n_pairs");
  const Json& flag = field(j, "flagged");
  if (c.k.size() != f.size() || c.v_group.size() != f.size() || c.spread.size() != f.size() ||
      static_cast<Eigen::Index>(n.size()) != f.size() || static_cast<Eigen::Index>(flag.size()) != f.size())
    throw ValidationError("curve columns differ in length");
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    c.n_pairs[i] = n[static_cast<std::size_t>(i)].get<int>();
    c.flagged[static_cast<std::size_t>(i)] = flag[static_cast<std::size_t>(i)].get<bool>();
  }
  return c;
}

void write_curve_csv(std::ostream& out, const DispersionCurve& curve, const std::string& config) {
  out << "# format: " << kCurveFormat << '\n';
  write_config_lines(out, config);
  out << "freq_hz,k_per_m,vg_mps,spread_mps,n_pairs,flagged\n";
  for (Eigen::Index i = 0; i < curve.size(); ++i) {
    if (!curve.valid(i)) continue;
    out << short_double(curve.freq_hz[i]) << ',' << short_double(curve.k[i]) << ','
        << short_double(curve.v_group[i]) << ',' << short_double(curve.spread[i]) << ',' << curve.n_pairs[i]
        << ',' << (curve.flagged[static_cast<std::size_t>(i)] ? 1 : 0) << '\n';
  }
}

DispersionCurve read_curve_csv(std::istream& in) {
  std::map<std::string, std::string> meta;
  const std::string header = read_header(in, meta);
  if (header != "freq_hz,k_per_m,vg_mps,spread_mps,n_pairs,flagged")
    throw ValidationError("curve CSV: unexpected column header \"" + header + "\"");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(split_csv(line));
  DispersionCurve c;
  c.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != 6) throw ValidationError("curve CSV: expected 6 columns");
    const auto i = static_cast<Eigen::Index>(r);
    c.freq_hz[i] = parse_double(rows[r][0]);
    c.k[i] = parse_double(rows[r][1]);
    c.v_group[i] = parse_double(rows[r][2]);
    c.spread[i] = parse_double(rows[r][3]);
    c.n_pairs[i] = std::stoi(rows[r][4]);
    c.flagged[r] = rows[r][5] == "1";
  }
  return c;
}

Json to_json(const ComparisonReport& report) {
  Json f = Json::array(), d = Json::array();
  for (Eigen::Index i = 0; i < report.freq_hz.size(); ++i) {
    f.push_back(report.freq_hz[i]);
    d.push_back(number(report.deviation[i]));
  }
  return {{"f_lo_hz", report.f_lo_hz},
          {"f_hi_hz", report.f_hi_hz},
          {"n_bins", report.n_bins},
          {"median_deviation", number(report.median)},
          {"max_deviation", number(report.max)},
          {"freq_hz", std::move(f)},
          {"deviation", std::move(d)}};
}

std::string embedded_config(const Json& j) {
  if (!j.contains("config") || !j["config"].is_string()) throw ValidationError("artifact has no embedded config");
  return j["config"].get<std::string>();
}

std::string embedded_config_csv(std::istream& in) {
  std::string text, line;
  const std::string prefix = "# config: ";
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) != 0) break;
    if (line.rfind(prefix, 0) == 0) text += line.substr(prefix.size()) + '\n';
  }
  return text;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(1) + "\n");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
  if (!out) throw ValidationError("write failed: " + path.string());
}

}  // namespace dispersim
