#include "dispersim/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dispersim/error.hpp"

namespace dispersim {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void log_line(const RunOptions& o, const std::string& text) {
  if (o.log) *o.log << text << std::endl;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

fs::path out_dir(const ScenarioConfig& config, const RunOptions& o) {
  return o.out_dir.empty() ? fs::path(config.output_dir) : o.out_dir;
}

ScenarioConfig with_bcs(ScenarioConfig c, BoundaryCondition left, BoundaryCondition right,
                        std::vector<ExcitationMode> modes) {
  c.beam.bc_left = left;
  c.beam.bc_right = right;
  c.modes = std::move(modes);
  return c;
}

Check check_at_most(std::string name, double value, double limit) {
  return {std::move(name), value, "<= " + fmt("%g", limit), std::isfinite(value) && value <= limit};
}

Check check_within(std::string name, double value, double target, double tol) {
  return {std::move(name), value, fmt("%g", target) + " +- " + fmt("%g", tol),
          std::abs(value - target) <= tol};
}

void write_curve(const fs::path& stem, const DispersionCurve& curve, const std::string& config, Summary& s) {
  std::ostringstream csv;
  write_curve_csv(csv, curve, config);
  write_text_file(stem.string() + ".csv", csv.str());
  write_json_file(stem.string() + ".json", to_json(curve, config));
  s.files.push_back(stem.string() + ".csv");
  s.files.push_back(stem.string() + ".json");
}

// Synthesizes, fits and writes the dataset and model of one scenario.
ModelArtifact synth_and_fit(const ScenarioConfig& config, ExcitationMode mode, const RunOptions& o,
                            const fs::path& dir, Summary& s, FrfDataset* keep = nullptr) {
  const std::string text = to_toml(config);
  auto t0 = Clock::now();
  FrfDataset frf = synthesize(config, mode, o.paper_grid);
  log_line(o, "synth " + config.tag(mode) + ": " + std::to_string(frf.n_freq()) + " bins x " +
                  std::to_string(frf.n_channels()) + " channels in " + fmt("%.1f", seconds_since(t0)) + " s");
  const fs::path frf_path = dir / ("frf_" + config.tag(mode) + ".json");
  write_json_file(frf_path, to_json(frf, text));
  s.files.push_back(frf_path);

  t0 = Clock::now();
  ModelArtifact model = fit_dataset(frf, config);
  log_line(o, "fit " + config.tag(mode) + ": " + std::to_string(model.model.order()) + " poles, E_rel " +
                  fmt("%.3g", model.report.rel_error) + " in " + fmt("%.1f", seconds_since(t0)) + " s");
  const fs::path model_path = dir / ("model_" + config.tag(mode) + ".json");
  write_json_file(model_path, to_json(model, text));
  write_text_file(dir / ("fit_report_" + config.tag(mode) + ".txt"), fit_table(model));
  s.files.push_back(model_path);
  if (keep) *keep = std::move(frf);
  return model;
}

// Sweeps a model and writes its curve, the oracle and the comparison.
DispersionCurve sweep_and_compare(const ScenarioConfig& config, const ModelArtifact& model, const RunOptions& o,
                                  const fs::path& dir, Summary& s, ComparisonReport* report = nullptr) {
  const std::string text = to_toml(config);
  const ExcitationMode mode = model.excitation_mode;
  const auto t0 = Clock::now();
  const DispersionCurve curve = estimate_dispersion(model, config);
  log_line(o, "dispersion " + config.tag(mode) + ": " + std::to_string((curve.n_pairs.array() > 0).count()) +
                  " valid bins in " + fmt("%.1f", seconds_since(t0)) + " s");
  write_curve(dir / ("curve_" + config.tag(mode)), curve, text, s);
  const DispersionCurve oracle = oracle_curve(config, mode, curve.freq_hz);
  write_curve(dir / ("oracle_" + std::string(to_string(mode))), oracle, text, s);
  const ComparisonReport rep = compare_to_oracle(curve, oracle, config.sweep.compare_lo_hz, config.sweep.compare_hi_hz);
  Json j = to_json(rep);
  j["scenario"] = config.tag(mode);
  j["config"] = text;
  const fs::path path = dir / ("comparison_" + config.tag(mode) + ".json");
  write_json_file(path, j);
  s.files.push_back(path);
  log_line(o, "  vs oracle " + fmt("%.0f", rep.f_lo_hz) + "-" + fmt("%.0f", rep.f_hi_hz) + " Hz: median " +
                  fmt("%.3g", rep.median) + ", max " + fmt("%.3g", rep.max));
  if (report) *report = rep;
  return curve;
}

ModelArtifact load_model(const fs::path& path) {
  if (!fs::exists(path)) throw ValidationError(path.string() + " not found; run `dispersim fit` first");
  return model_from_json(read_json_file(path));
}

}  // namespace

bool Summary::passed() const {
  for (const Check& c : checks)
    if (!c.passed) return false;
  return true;
}

FrfDataset synthesize(const ScenarioConfig& config, ExcitationMode mode, bool paper_grid) {
  const double step = paper_grid ? config.paper_resolution_hz : config.grid_resolution_hz;
  return synthesize_frfs(config.spec(mode), uniform_grid_hz(config.grid_start_hz, config.grid_stop_hz, step));
}

ModelArtifact fit_dataset(const FrfDataset& frf, const ScenarioConfig& config) {
  frf.validate();
  ModelArtifact a;
  const double f_min = frf.freq_grid[0] / (2.0 * M_PI);
  const double f_max = frf.freq_grid[frf.n_freq() - 1] / (2.0 * M_PI);
  const BandPlan& plan = config.plan(frf.excitation_mode);
  plan.validate(f_min, f_max);
  FitResult fit = fit_full(frf, plan, config.vf);
  a.model = std::move(fit.model);
  a.report = std::move(fit.report);
  a.excitation_mode = frf.excitation_mode;
  a.bc_left = frf.bc_left;
  a.bc_right = frf.bc_right;
  a.locations = frf.locations;
  a.f_min_hz = f_min;
  a.f_max_hz = f_max;
  return a;
}

DispersionCurve estimate_dispersion(const ModelArtifact& model, const ScenarioConfig& config) {
  const SweepOptions opts = config.sweep_options(model.excitation_mode, model.f_max_hz);
  const double lo = opts.centers_hz.front(), hi = opts.centers_hz.back();
  if (lo < model.f_min_hz || hi > model.f_max_hz)
    throw ValidationError("sweep centers " + fmt("%g", lo) + "-" + fmt("%g", hi) + " Hz reach outside the model's " +
                          fmt("%g", model.f_min_hz) + "-" + fmt("%g", model.f_max_hz) + " Hz fitted range");
  if (model.model.poles.max_real() >= 0.0) throw UnstableModel("model has poles with Re >= 0");
  return sweep_and_aggregate(model.model, model.locations, opts);
}

DispersionCurve oracle_curve(const ScenarioConfig& config, ExcitationMode mode, const Eigen::VectorXd& freq_hz) {
  const WaveMode wave = mode == ExcitationMode::Flexural ? WaveMode::FlexuralPropagating : WaveMode::Longitudinal;
  return analytic_group_velocity(config.spec(mode), wave, 2.0 * M_PI * freq_hz);
}

std::string fit_table(const ModelArtifact& a) {
  std::ostringstream o;
  o << "Band  Frequency range (Hz)   Resonant peaks  No. of poles  E_rel\n";
  for (std::size_t b = 0; b < a.report.bands.size(); ++b) {
    const BandFit& f = a.report.bands[b];
    char line[160];
    std::snprintf(line, sizeof line, "%-5zu %8.0f - %-8.0f     %-15zu %-13d %.3e\n", b + 1, f.band.f_lo_hz,
                  f.band.f_hi_hz, f.peaks_hz.size(), f.band.pole_budget, f.rel_error);
    o << line;
  }
  char total[160];
  std::snprintf(total, sizeof total, "Full  %8.0f - %-8.0f     %-15s %-13ld %.3e\n", a.f_min_hz, a.f_max_hz, "",
                static_cast<long>(a.model.order()), a.report.rel_error);
  o << total;
  o << "State matrices: A " << a.model.A.rows() << "x" << a.model.A.cols() << ", B " << a.model.B.rows() << "x1, C "
    << a.model.C.rows() << "x" << a.model.C.cols() << "\n";
  return o.str();
}

Summary cmd_synth(const ScenarioConfig& config, const RunOptions& o) {
  Summary s{"synth", {}, {}};
  const fs::path dir = out_dir(config, o);
  const std::string text = to_toml(config);
  for (ExcitationMode mode : config.modes) {
    const auto t0 = Clock::now();
    const FrfDataset frf = synthesize(config, mode, o.paper_grid);
    log_line(o, "synth " + config.tag(mode) + ": " + std::to_string(frf.n_freq()) + " bins x " +
                    std::to_string(frf.n_channels()) + " channels in " + fmt("%.1f", seconds_since(t0)) + " s");
    const fs::path stem = dir / ("frf_" + config.tag(mode));
    write_json_file(stem.string() + ".json", to_json(frf, text));
    std::ostringstream csv;
    write_frf_csv(csv, frf, text);
    write_text_file(stem.string() + ".csv", csv.str());
    s.files.push_back(stem.string() + ".json");
    s.files.push_back(stem.string() + ".csv");
  }
  return s;
}

Summary cmd_fit(const ScenarioConfig& config, const RunOptions& o) {
  Summary s{"fit", {}, {}};
  const fs::path dir = out_dir(config, o);
  const std::string text = to_toml(config);
  for (ExcitationMode mode : config.modes) {
    const fs::path frf_path = dir / ("frf_" + config.tag(mode) + ".json");
    if (!fs::exists(frf_path)) throw ValidationError(frf_path.string() + " not found; run `dispersim synth` first");
    const FrfDataset frf = frf_from_json(read_json_file(frf_path));
    const auto t0 = Clock::now();
    const ModelArtifact model = fit_dataset(frf, config);
    log_line(o, "fit " + config.tag(mode) + ": " + std::to_string(model.model.order()) + " poles, E_rel " +
                    fmt("%.3g", model.report.rel_error) + " in " + fmt("%.1f", seconds_since(t0)) + " s");
    const fs::path model_path = dir / ("model_" + config.tag(mode) + ".json");
    write_json_file(model_path, to_json(model, text));
    Json report = to_json(model.report);
    report["scenario"] = config.tag(mode);
    report["order"] = model.model.order();
    report["config"] = text;
    write_json_file(dir / ("fit_report_" + config.tag(mode) + ".json"), report);
    write_text_file(dir / ("fit_report_" + config.tag(mode) + ".txt"), fit_table(model));
    log_line(o, fit_table(model));
    s.files.push_back(model_path);
    s.files.push_back(dir / ("fit_report_" + config.tag(mode) + ".json"));
  }
  return s;
}

Summary cmd_dispersion(const ScenarioConfig& config, const RunOptions& o) {
  Summary s{"dispersion", {}, {}};
  const fs::path dir = out_dir(config, o);
  for (ExcitationMode mode : config.modes) {
    const ModelArtifact model = load_model(dir / ("model_" + config.tag(mode) + ".json"));
    if (model.excitation_mode != mode) throw ValidationError("model file holds a different excitation mode");
    sweep_and_compare(config, model, o, dir, s);
  }
  return s;
}

Summary cmd_reproduce(const std::string& id, const ScenarioConfig& base, const RunOptions& o) {
  Summary s{id, {}, {}};
  const fs::path dir = out_dir(base, o) / id;
  using BC = BoundaryCondition;
  const auto flex = ExcitationMode::Flexural;
  const auto lon = ExcitationMode::Longitudinal;

  if (id == "table1") {
    const ScenarioConfig c = with_bcs(base, BC::Free, BC::Free, {flex});
    const ModelArtifact m = synth_and_fit(c, flex, o, dir, s);
    const int peaks[] = {13, 18, 13, 21, 16, 13, 12};
    for (std::size_t b = 0; b < m.report.bands.size(); ++b) {
      const BandFit& f = m.report.bands[b];
      const std::string name = "band " + std::to_string(b + 1);
      if (b < 7 && m.report.bands.size() == 7)
        s.checks.push_back(check_within(name + " resonant peaks", static_cast<double>(f.peaks_hz.size()), peaks[b], 1));
      s.checks.push_back(check_at_most(name + " E_rel", f.rel_error, 1e-5));
    }
    s.checks.push_back(check_within("total poles", static_cast<double>(m.model.order()), 212, 4));
    s.checks.push_back(check_at_most("full-range E_rel", m.report.rel_error, 1e-5));
    log_line(o, fit_table(m));
  } else if (id == "table2") {
    struct Row {
      BC left, right;
      ExcitationMode mode;
      int order;
      int tolerance;
    };
    const Row rows[] = {{BC::Free, BC::Free, flex, 212, 4},
                        {BC::Clamped, BC::Free, flex, 214, 4},
                        {BC::Pinned, BC::Pinned, flex, 212, 4},
                        {BC::Free, BC::Free, lon, 48, 0}};
    std::ostringstream table;
    table << "Boundary conditions        Mode          A            B          C          E_rel\n";
    for (const Row& r : rows) {
      const ScenarioConfig c = with_bcs(base, r.left, r.right, {r.mode});
      const ModelArtifact m = synth_and_fit(c, r.mode, o, dir, s);
      const Eigen::Index n = m.model.order();
      char line[200];
      std::snprintf(line, sizeof line, "%-26s %-13s %ldx%-9ld %ldx1%-6s %ldx%-7ld %.3e\n", c.tag(r.mode).c_str(),
                    std::string(to_string(r.mode)).c_str(), long(n), long(n), long(n), "", long(m.model.C.rows()),
                    long(n), m.report.rel_error);
      table << line;
      s.checks.push_back(check_within(c.tag(r.mode) + " order", static_cast<double>(n), r.order, r.tolerance));
      s.checks.push_back(check_at_most(c.tag(r.mode) + " E_rel", m.report.rel_error, 1e-5));
    }
    write_text_file(dir / "table2.txt", table.str());
    s.files.push_back(dir / "table2.txt");
    log_line(o, table.str());
  } else if (id == "fig4" || id == "fig6") {
    const ExcitationMode mode = id == "fig4" ? flex : lon;
    const ScenarioConfig c = with_bcs(base, BC::Free, BC::Free, {mode});
    const ModelArtifact m = synth_and_fit(c, mode, o, dir, s);
    ComparisonReport rep;
    const DispersionCurve curve = sweep_and_compare(c, m, o, dir, s, &rep);
    if (mode == flex) {
      s.checks.push_back(check_at_most("median |dv|/v 2-40 kHz", rep.median, 0.02));
      s.checks.push_back(check_at_most("max |dv|/v 2-40 kHz", rep.max, 0.05));
      bool flagged_ok = true;
      for (Eigen::Index i = 0; i < curve.size(); ++i)
        if (curve.valid(i) && curve.freq_hz[i] > c.sweep.flag_above_hz && !curve.flagged[static_cast<std::size_t>(i)])
          flagged_ok = false;
      s.checks.push_back({"bins above 45 kHz flagged", flagged_ok ? 1.0 : 0.0, "== 1", flagged_ok});
    } else {
      s.checks.push_back(check_at_most("max |dv|/v vs sqrt(E/rho) 2-40 kHz", rep.max, 0.01));
    }
  } else if (id == "fig8") {
    const std::pair<BC, BC> cases[] = {{BC::Free, BC::Free}, {BC::Clamped, BC::Free}, {BC::Pinned, BC::Pinned}};
    std::vector<DispersionCurve> curves;
    std::vector<FrfDataset> frfs;
    std::vector<std::string> tags;
    for (const auto& [left, right] : cases) {
      const ScenarioConfig c = with_bcs(base, left, right, {flex});
      FrfDataset frf;
      const ModelArtifact m = synth_and_fit(c, flex, o, dir, s, &frf);
      curves.push_back(sweep_and_compare(c, m, o, dir, s));
      frfs.push_back(std::move(frf));
      tags.push_back(c.tag(flex));
    }
    for (std::size_t a = 0; a < curves.size(); ++a)
      for (std::size_t b = a + 1; b < curves.size(); ++b) {
        const ComparisonReport rep =
            compare_to_oracle(curves[a], curves[b], base.sweep.compare_lo_hz, base.sweep.compare_hi_hz);
        const double frf_diff = (frfs[a].values - frfs[b].values).norm() / frfs[b].values.norm();
        s.checks.push_back(check_at_most(tags[a] + " vs " + tags[b] + " median curve deviation", rep.median, 0.01));
        s.checks.push_back({tags[a] + " vs " + tags[b] + " FRF difference / curve deviation",
                            frf_diff / rep.median, "> 10", frf_diff > 10.0 * rep.median});
      }
  } else {
    throw ValidationError("unknown reproduction id \"" + id + "\" (expected table1, table2, fig4, fig6 or fig8)");
  }

  Json j;
  j["id"] = id;
  j["passed"] = s.passed();
  Json checks = Json::array();
  for (const Check& c : s.checks)
    checks.push_back({{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"passed", c.passed}});
  j["checks"] = std::move(checks);
  j["config"] = to_toml(base);
  write_json_file(dir / "summary.json", j);
  s.files.push_back(dir / "summary.json");
  return s;
}

std::string format_summary(const Summary& s) {
  std::ostringstream o;
  for (const Check& c : s.checks)
    o << (c.passed ? "PASS  " : "FAIL  ") << c.name << ": " << fmt("%.6g", c.value) << " (" << c.limit << ")\n";
  if (!s.checks.empty()) o << s.id << ": " << (s.passed() ? "PASS" : "FAIL") << "\n";
  return o.str();
}

}  // namespace dispersim
