#include "dispersim/config.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "dispersim/error.hpp"
#include "dispersim/io.hpp"

namespace dispersim {

namespace {

using Item = std::variant<double, std::string>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing comment that is not inside a string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

[[noreturn]] void syntax(int line, const std::string& what) {
  throw ValidationError("config line " + std::to_string(line) + ": " + what);
}

bool is_bare_key(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  return true;
}

Item parse_scalar(const std::string& text, int line) {
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
    const std::string body = text.substr(1, text.size() - 2);
    if (body.find('"') != std::string::npos) syntax(line, "embedded quote in string");
    return body;
  }
  try {
    return parse_double(text);
  } catch (const ValidationError&) {
    syntax(line, "cannot read value \"" + text + "\"");
  }
}

struct Unit {
  const char* name;
  const char* dimension;
  double scale;
};

constexpr Unit kUnits[] = {
    {"m", "length", 1.0},          {"cm", "length", 1e-2},       {"mm", "length", 1e-3},
    {"in", "length", 0.0254},      {"ft", "length", 0.3048},     {"Pa", "pressure", 1.0},
    {"kPa", "pressure", 1e3},      {"MPa", "pressure", 1e6},     {"GPa", "pressure", 1e9},
    {"kg/m^3", "density", 1.0},    {"g/cm^3", "density", 1e3},   {"Hz", "frequency", 1.0},
    {"kHz", "frequency", 1e3},     {"MHz", "frequency", 1e6},    {"s", "time", 1.0},
    {"ms", "time", 1e-3},          {"us", "time", 1e-6},
};

// Typed access to one section, remembering which keys were used.
class Section {
 public:
  Section(const TomlDocument& doc, std::string name) : name_(std::move(name)) {
    const auto it = doc.find(name_);
    if (it != doc.end()) entries_ = &it->second;
  }

  bool has(const std::string& key) const { return entries_ && entries_->count(key); }

  double quantity(const std::string& key, const std::string& dimension, double fallback) {
    const TomlValue* v = get(key);
    if (!v) return fallback;
    if (const auto* d = std::get_if<double>(&v->value)) return *d;
    if (const auto* s = std::get_if<std::string>(&v->value)) return convert(key, *s, dimension);
    fail(key, "expected a number or quantity");
  }

  int integer(const std::string& key, int fallback) {
    const double d = quantity(key, "", fallback);
    if (d != std::floor(d) || std::abs(d) > 1e9) fail(key, "expected an integer");
    return static_cast<int>(d);
  }

  bool boolean(const std::string& key, bool fallback) {
    const TomlValue* v = get(key);
    if (!v) return fallback;
    if (const auto* b = std::get_if<bool>(&v->value)) return *b;
    fail(key, "expected true or false");
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const TomlValue* v = get(key);
    if (!v) return fallback;
    if (const auto* s = std::get_if<std::string>(&v->value)) return *s;
    fail(key, "expected a string");
  }

  std::vector<double> quantities(const std::string& key, const std::string& dimension) {
    const TomlValue* v = get(key);
    if (!v) return {};
    const auto* items = std::get_if<std::vector<Item>>(&v->value);
    if (!items) fail(key, "expected an array");
    std::vector<double> out;
    for (const Item& item : *items) {
      if (const auto* d = std::get_if<double>(&item)) out.push_back(*d);
      else out.push_back(convert(key, std::get<std::string>(item), dimension));
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key) {
    const TomlValue* v = get(key);
    if (!v) return {};
    const auto* items = std::get_if<std::vector<Item>>(&v->value);
    if (!items) fail(key, "expected an array of strings");
    std::vector<std::string> out;
    for (const Item& item : *items) {
      const auto* s = std::get_if<std::string>(&item);
      if (!s) fail(key, "expected an array of strings");
      out.push_back(*s);
    }
    return out;
  }

  // Wraps a validation failure of a derived object with the field name.
  template <class F>
  auto checked(const std::string& key, F&& f) {
    try {
      return f();
    } catch (const ValidationError& e) {
      fail(key, e.what());
    }
  }

  void reject_unused() const {
    if (!entries_) return;
    for (const auto& [key, value] : *entries_)
      if (!used_.count(key))
        throw ValidationError("config line " + std::to_string(value.line) + ": unknown key [" + name_ + "] " + key);
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    std::string where = "config [" + name_ + "] " + key;
    if (entries_) {
      const auto it = entries_->find(key);
      if (it != entries_->end()) where += " (line " + std::to_string(it->second.line) + ")";
    }
    throw ValidationError(where + ": " + what);
  }

 private:
  const TomlValue* get(const std::string& key) {
    used_.insert(key);
    if (!entries_) return nullptr;
    const auto it = entries_->find(key);
    return it == entries_->end() ? nullptr : &it->second;
  }

  double convert(const std::string& key, const std::string& text, const std::string& dimension) const {
    try {
      return parse_quantity(text, dimension);
    } catch (const ValidationError& e) {
      fail(key, e.what());
    }
  }

  std::string name_;
  const std::map<std::string, TomlValue>* entries_ = nullptr;
  std::set<std::string> used_;
};

const std::set<std::string> kSections{"scenario", "material", "section", "beam", "grid",
                                      "bands.flexural", "bands.longitudinal", "fit", "burst", "sweep"};

BandPlan read_plan(Section& s, const BandPlan& fallback) {
  if (!s.has("edges") && !s.has("poles")) return fallback;
  const std::vector<double> edges = s.quantities("edges", "frequency");
  const std::vector<double> poles = s.quantities("poles", "");
  if (edges.size() < 2) s.fail("edges", "needs at least two band edges");
  if (poles.size() + 1 != edges.size()) s.fail("poles", "needs one pole budget per band (edges - 1 entries)");
  BandPlan plan;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (poles[i] != std::floor(poles[i])) s.fail("poles", "pole budgets must be integers");
    plan.bands.push_back(Band{edges[i], edges[i + 1], static_cast<int>(poles[i])});
  }
  return plan;
}

std::string number_list(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += short_double(values[i]);
  }
  return out + "]";
}

std::string plan_toml(const std::string& name, const BandPlan& plan) {
  std::vector<double> edges, poles;
  for (const Band& b : plan.bands) {
    if (edges.empty()) edges.push_back(b.f_lo_hz);
    edges.push_back(b.f_hi_hz);
    poles.push_back(b.pole_budget);
  }
  return "\n[bands." + name + "]\nedges = " + number_list(edges) + "\npoles = " + number_list(poles) + "\n";
}

}  // namespace

TomlDocument parse_toml(const std::string& text) {
  TomlDocument doc;
  std::string section;
  doc[section];
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') syntax(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!is_bare_key(section)) syntax(line_no, "bad section name \"" + section + "\"");
      if (doc.count(section) && !doc[section].empty()) syntax(line_no, "section [" + section + "] repeated");
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) syntax(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string rhs = trim(line.substr(eq + 1));
    if (!is_bare_key(key)) syntax(line_no, "bad key \"" + key + "\"");
    if (rhs.empty()) syntax(line_no, "missing value for " + key);
    if (doc[section].count(key)) syntax(line_no, "key " + key + " repeated");

    TomlValue value;
    value.line = line_no;
    if (rhs == "true" || rhs == "false") {
      value.value = rhs == "true";
    } else if (rhs.front() == '[') {
      if (rhs.back() != ']') syntax(line_no, "arrays must close on the same line");
      std::vector<Item> items;
      const std::string body = trim(rhs.substr(1, rhs.size() - 2));
      std::string cell;
      bool quoted = false;
      auto flush = [&](bool last) {
        const std::string t = trim(cell);
        if (t.empty()) {
          if (!(last && items.empty())) syntax(line_no, "empty array element");
        } else {
          items.push_back(parse_scalar(t, line_no));
        }
        cell.clear();
      };
      for (char c : body) {
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) flush(false);
        else cell += c;
      }
      if (quoted) syntax(line_no, "unterminated string");
      flush(true);
      value.value = std::move(items);
    } else {
      std::visit([&](auto&& v) { value.value = v; }, parse_scalar(rhs, line_no));
    }
    doc[section][key] = std::move(value);
  }
  return doc;
}

double parse_quantity(const std::string& text, const std::string& dimension) {
  const std::string t = trim(text);
  const char* begin = t.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin) throw ValidationError("\"" + text + "\" is not a number");
  const std::string unit = trim(std::string(end));
  if (unit.empty()) return v;
  for (const Unit& u : kUnits) {
    if (unit != u.name) continue;
    if (dimension != u.dimension)
      throw ValidationError("unit " + unit + " is not a " + (dimension.empty() ? "plain number" : dimension) + " unit");
    return v * u.scale;
  }
  throw ValidationError("unknown unit \"" + unit + "\"");
}

WaveguideSpec ScenarioConfig::spec(ExcitationMode mode) const {
  WaveguideSpec s = beam;
  s.excitation_mode = mode;
  return s;
}

const BandPlan& ScenarioConfig::plan(ExcitationMode mode) const {
  return mode == ExcitationMode::Flexural ? flexural_plan : longitudinal_plan;
}

std::string ScenarioConfig::tag(ExcitationMode mode) const {
  return std::string(to_string(mode)) + "_" + std::string(to_string(beam.bc_left)) + "-" +
         std::string(to_string(beam.bc_right));
}

SweepOptions ScenarioConfig::sweep_options(ExcitationMode mode, double model_f_max_hz) const {
  const bool flex = mode == ExcitationMode::Flexural;
  SweepOptions o = default_sweep(mode);
  o.centers_hz.clear();
  const double start = flex ? sweep.start_hz_flexural : sweep.start_hz_longitudinal;
  const double stop = flex ? sweep.stop_hz_flexural : sweep.stop_hz_longitudinal;
  for (int i = 0;; ++i) {
    const double f = start + i * sweep.step_hz;
    if (f > stop * (1.0 + 1e-12)) break;
    o.centers_hz.push_back(f);
  }
  o.n_cycles = flex ? burst.cycles_flexural : burst.cycles_longitudinal;
  o.sample_rate = burst.sample_rate;
  o.duration = sweep.duration;
  o.extract.kappa = flex ? burst.kappa_flexural : burst.kappa_longitudinal;
  o.extract.gamma = burst.gamma;
  o.extract.follow_fraction = burst.follow_fraction;
  o.pair.threshold = sweep.threshold;
  o.f_min_hz = sweep.f_min_hz;
  o.flag_above_hz = sweep.flag_above_hz;
  o.min_pairs = sweep.min_pairs;
  o.isolated_only = sweep.isolated_only;
  o.band_limit_hz = sweep.band_limit_hz > 0.0 ? sweep.band_limit_hz : model_f_max_hz;
  return o;
}

void ScenarioConfig::validate() const {
  auto wrap = [](const std::string& where, const std::function<void()>& f) {
    try {
      f();
    } catch (const ValidationError& e) {
      throw ValidationError("config " + where + ": " + e.what());
    }
  };
  if (modes.empty()) throw ValidationError("config [scenario] modes: at least one excitation mode required");
  wrap("[material]/[section]/[beam]", [&] { spec(ExcitationMode::Flexural).validate(); });
  wrap("[grid]", [&] {
    if (!(grid_start_hz > 0.0) || !(grid_stop_hz > grid_start_hz) || !(grid_resolution_hz > 0.0) ||
        !(paper_resolution_hz > 0.0))
      throw ValidationError("needs 0 < start < stop and positive resolutions");
  });
  wrap("[bands.flexural]", [&] { flexural_plan.validate(grid_start_hz, grid_stop_hz); });
  wrap("[bands.longitudinal]", [&] { longitudinal_plan.validate(grid_start_hz, grid_stop_hz); });
  wrap("[fit]", [&] {
    if (!(vf.tolerance > 0.0) || vf.max_iterations < 1 || vf.max_full_iterations < 0 || vf.guard_pairs < 0 ||
        !(vf.condition_limit > 1.0) || !(vf.weight_floor > 0.0) || !(vf.dedupe_tolerance > 0.0) ||
        vf.peaks.window < 1 || !(vf.peaks.min_prominence_db > 0.0) ||
        vf.peaks.min_channels < 0 || !(vf.peaks.cluster_tolerance > 0.0))
      throw ValidationError("tolerances, iteration counts and peak settings must be positive");
  });
  wrap("[burst]", [&] {
    if (!(burst.sample_rate > 0.0) || burst.cycles_flexural < 1 || burst.cycles_longitudinal < 1 ||
        !(burst.kappa_flexural > 0.0) || !(burst.kappa_longitudinal > 0.0) || burst.gamma < 0.0 ||
        burst.follow_fraction < 0.0 || burst.follow_fraction >= 1.0)
      throw ValidationError("sample rate, cycles and kappa must be positive, gamma >= 0, follow_fraction in [0, 1)");
  });
  wrap("[sweep]", [&] {
    if (!(sweep.step_hz > 0.0) || !(sweep.start_hz_flexural > 0.0) || !(sweep.start_hz_longitudinal > 0.0) ||
        sweep.stop_hz_flexural < sweep.start_hz_flexural || sweep.stop_hz_longitudinal < sweep.start_hz_longitudinal)
      throw ValidationError("center frequencies need 0 < start <= stop and step > 0");
    if (!(sweep.duration > 0.0) || !(sweep.threshold > 0.0 && sweep.threshold < 1.0) || sweep.min_pairs < 1)
      throw ValidationError("duration > 0, threshold in (0, 1) and min_pairs >= 1 required");
    if (!(sweep.compare_hi_hz > sweep.compare_lo_hz)) throw ValidationError("compare_lo must be below compare_hi");
    const double top = std::max(sweep.stop_hz_flexural, sweep.stop_hz_longitudinal);
    if (top * 20.0 > burst.sample_rate) throw ValidationError("sample rate below 20x the highest center frequency");
  });
}

ScenarioConfig parse_config(const std::string& text) {
  const TomlDocument doc = parse_toml(text);
  for (const auto& [name, entries] : doc) {
    if (name.empty()) {
      if (!entries.empty())
        throw ValidationError("config line " + std::to_string(entries.begin()->second.line) +
                              ": key outside any section");
      continue;
    }
    if (!kSections.count(name)) throw ValidationError("config: unknown section [" + name + "]");
  }

  ScenarioConfig c;
  Section scenario(doc, "scenario");
  c.name = scenario.string("name", c.name);
  c.output_dir = scenario.string("output_dir", c.output_dir);
  if (scenario.has("modes")) {
    c.modes.clear();
    for (const std::string& m : scenario.strings("modes"))
      c.modes.push_back(scenario.checked("modes", [&] { return parse_excitation_mode(m); }));
    if (c.modes.empty()) scenario.fail("modes", "at least one excitation mode required");
  }

  Section material(doc, "material");
  c.beam.material.rho = material.quantity("rho", "density", c.beam.material.rho);
  c.beam.material.E = material.quantity("E", "pressure", c.beam.material.E);
  c.beam.material.G = material.quantity("G", "pressure", c.beam.material.G);
  c.beam.material.eta = material.quantity("eta", "", c.beam.material.eta);
  material.checked("E", [&] { c.beam.material.validate(); });

  Section section(doc, "section");
  c.beam.section.width = section.quantity("width", "length", c.beam.section.width);
  c.beam.section.height = section.quantity("height", "length", c.beam.section.height);
  c.beam.section.kbar = section.quantity("kbar", "", c.beam.section.kbar);

  Section beam(doc, "beam");
  c.beam.length = beam.quantity("length", "length", c.beam.length);
  c.beam.bc_left = beam.checked("bc_left", [&] { return parse_boundary_condition(beam.string("bc_left", "free")); });
  c.beam.bc_right = beam.checked("bc_right", [&] { return parse_boundary_condition(beam.string("bc_right", "free")); });
  if (beam.has("actuator")) {
    const std::vector<double> a = beam.quantities("actuator", "length");
    if (a.size() != 2) beam.fail("actuator", "expected [left_edge, right_edge]");
    c.beam.actuator_edges = {a[0], a[1]};
  }
  const bool explicit_sensors = beam.has("sensors");
  const bool pitched = beam.has("sensor_start") || beam.has("sensor_pitch") || beam.has("sensor_count");
  if (explicit_sensors && pitched) beam.fail("sensors", "give either sensors or sensor_start/pitch/count");
  if (explicit_sensors) {
    c.beam.sensor_positions = beam.quantities("sensors", "length");
    if (c.beam.sensor_positions.empty()) beam.fail("sensors", "sensor list is empty");
  } else if (pitched) {
    const double start = beam.quantity("sensor_start", "length", 19.0 * kInch);
    const double pitch = beam.quantity("sensor_pitch", "length", 1.0 * kInch);
    const int count = beam.integer("sensor_count", 23);
    if (count < 1) beam.fail("sensor_count", "sensor list is empty");
    if (!(pitch > 0.0)) beam.fail("sensor_pitch", "must be > 0");
    c.beam.sensor_positions.clear();
    for (int i = 0; i < count; ++i) c.beam.sensor_positions.push_back(start + i * pitch);
  } else {
    c.beam.sensor_positions = reference_beam().sensor_positions;
  }
  beam.checked("sensors", [&] { c.spec(ExcitationMode::Flexural).validate(); });

  Section grid(doc, "grid");
  c.grid_start_hz = grid.quantity("start", "frequency", c.grid_start_hz);
  c.grid_stop_hz = grid.quantity("stop", "frequency", c.grid_stop_hz);
  c.grid_resolution_hz = grid.quantity("resolution", "frequency", c.grid_resolution_hz);
  c.paper_resolution_hz = grid.quantity("paper_resolution", "frequency", c.paper_resolution_hz);
  c.longitudinal_plan = default_longitudinal_plan(c.grid_start_hz, c.grid_stop_hz);

  Section flex_bands(doc, "bands.flexural");
  c.flexural_plan = read_plan(flex_bands, c.flexural_plan);
  Section long_bands(doc, "bands.longitudinal");
  c.longitudinal_plan = read_plan(long_bands, c.longitudinal_plan);

  Section fit(doc, "fit");
  c.vf.tolerance = fit.quantity("tolerance", "", c.vf.tolerance);
  c.vf.max_iterations = fit.integer("max_iterations", c.vf.max_iterations);
  c.vf.max_full_iterations = fit.integer("max_full_iterations", c.vf.max_full_iterations);
  c.vf.condition_limit = fit.quantity("condition_limit", "", c.vf.condition_limit);
  c.vf.weight_floor = fit.quantity("weight_floor", "", c.vf.weight_floor);
  c.vf.inverse_weighting = fit.boolean("inverse_weighting", c.vf.inverse_weighting);
  c.vf.dedupe_tolerance = fit.quantity("dedupe_tolerance", "", c.vf.dedupe_tolerance);
  c.vf.guard_pairs = fit.integer("guard_pairs", c.vf.guard_pairs);
  c.vf.peaks.min_prominence_db = fit.quantity("peak_prominence_db", "", c.vf.peaks.min_prominence_db);
  c.vf.peaks.window = fit.integer("peak_window", c.vf.peaks.window);
  c.vf.peaks.min_channels = fit.integer("peak_min_channels", c.vf.peaks.min_channels);
  c.vf.peaks.cluster_tolerance = fit.quantity("peak_cluster_tolerance", "", c.vf.peaks.cluster_tolerance);

  Section burst(doc, "burst");
  BurstSettings& b = c.burst;
  b.sample_rate = burst.quantity("sample_rate", "frequency", b.sample_rate);
  b.cycles_flexural = burst.integer("cycles_flexural", b.cycles_flexural);
  b.cycles_longitudinal = burst.integer("cycles_longitudinal", b.cycles_longitudinal);
  b.kappa_flexural = burst.quantity("kappa_flexural", "", b.kappa_flexural);
  b.kappa_longitudinal = burst.quantity("kappa_longitudinal", "", b.kappa_longitudinal);
  b.gamma = burst.quantity("gamma", "", b.gamma);
  b.follow_fraction = burst.quantity("follow_fraction", "", b.follow_fraction);

  Section sweep(doc, "sweep");
  SweepSettings& s = c.sweep;
  s.start_hz_flexural = sweep.quantity("start_flexural", "frequency", s.start_hz_flexural);
  s.stop_hz_flexural = sweep.quantity("stop_flexural", "frequency", s.stop_hz_flexural);
  s.start_hz_longitudinal = sweep.quantity("start_longitudinal", "frequency", s.start_hz_longitudinal);
  s.stop_hz_longitudinal = sweep.quantity("stop_longitudinal", "frequency", s.stop_hz_longitudinal);
  s.step_hz = sweep.quantity("step", "frequency", s.step_hz);
  s.duration = sweep.quantity("duration", "time", s.duration);
  s.threshold = sweep.quantity("threshold", "", s.threshold);
  s.f_min_hz = sweep.quantity("f_min", "frequency", s.f_min_hz);
  s.flag_above_hz = sweep.quantity("flag_above", "frequency", s.flag_above_hz);
  s.min_pairs = sweep.integer("min_pairs", s.min_pairs);
  s.isolated_only = sweep.boolean("isolated_only", s.isolated_only);
  s.band_limit_hz = sweep.quantity("band_limit", "frequency", s.band_limit_hz);
  s.compare_lo_hz = sweep.quantity("compare_lo", "frequency", s.compare_lo_hz);
  s.compare_hi_hz = sweep.quantity("compare_hi", "frequency", s.compare_hi_hz);

  for (const Section* sec : {&scenario, &material, &section, &beam, &grid, &flex_bands, &long_bands, &fit,
                             &burst, &sweep})
    sec->reject_unused();
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path));
}

std::string to_toml(const ScenarioConfig& c) {
  std::ostringstream o;
  auto q = [](double v) { return short_double(v); };
  auto str = [](std::string_view s) { return "\"" + std::string(s) + "\""; };
  o << "[scenario]\nname = " << str(c.name) << "\nmodes = [";
  for (std::size_t i = 0; i < c.modes.size(); ++i) o << (i ? ", " : "") << str(to_string(c.modes[i]));
  o << "]\noutput_dir = " << str(c.output_dir) << "\n";

  const Material& m = c.beam.material;
  o << "\n[material]\nrho = " << q(m.rho) << "\nE = " << q(m.E) << "\nG = " << q(m.G) << "\neta = " << q(m.eta)
    << "\n";
  o << "\n[section]\nwidth = " << q(c.beam.section.width) << "\nheight = " << q(c.beam.section.height)
    << "\nkbar = " << q(c.beam.section.kbar) << "\n";
  o << "\n[beam]\nlength = " << q(c.beam.length) << "\nbc_left = " << str(to_string(c.beam.bc_left))
    << "\nbc_right = " << str(to_string(c.beam.bc_right)) << "\nactuator = "
    << number_list({c.beam.actuator_edges[0], c.beam.actuator_edges[1]})
    << "\nsensors = " << number_list(c.beam.sensor_positions) << "\n";
  o << "\n[grid]\nstart = " << q(c.grid_start_hz) << "\nstop = " << q(c.grid_stop_hz)
    << "\nresolution = " << q(c.grid_resolution_hz) << "\npaper_resolution = " << q(c.paper_resolution_hz) << "\n";
  o << plan_toml("flexural", c.flexural_plan) << plan_toml("longitudinal", c.longitudinal_plan);

  const VfSettings& v = c.vf;
  o << "\n[fit]\ntolerance = " << q(v.tolerance) << "\nmax_iterations = " << v.max_iterations
    << "\nmax_full_iterations = " << v.max_full_iterations << "\ncondition_limit = " << q(v.condition_limit)
    << "\nweight_floor = " << q(v.weight_floor) << "\ninverse_weighting = " << (v.inverse_weighting ? "true" : "false")
    << "\ndedupe_tolerance = " << q(v.dedupe_tolerance) << "\nguard_pairs = " << v.guard_pairs
    << "\npeak_prominence_db = " << q(v.peaks.min_prominence_db)
    << "\npeak_window = " << v.peaks.window << "\npeak_min_channels = " << v.peaks.min_channels
    << "\npeak_cluster_tolerance = " << q(v.peaks.cluster_tolerance) << "\n";

  const BurstSettings& b = c.burst;
  o << "\n[burst]\nsample_rate = " << q(b.sample_rate) << "\ncycles_flexural = " << b.cycles_flexural
    << "\ncycles_longitudinal = " << b.cycles_longitudinal << "\nkappa_flexural = " << q(b.kappa_flexural)
    << "\nkappa_longitudinal = " << q(b.kappa_longitudinal) << "\ngamma = " << q(b.gamma)
    << "\nfollow_fraction = " << q(b.follow_fraction) << "\n";

  const SweepSettings& s = c.sweep;
  o << "\n[sweep]\nstart_flexural = " << q(s.start_hz_flexural) << "\nstop_flexural = " << q(s.stop_hz_flexural)
    << "\nstart_longitudinal = " << q(s.start_hz_longitudinal) << "\nstop_longitudinal = " << q(s.stop_hz_longitudinal)
    << "\nstep = " << q(s.step_hz) << "\nduration = " << q(s.duration) << "\nthreshold = " << q(s.threshold)
    << "\nf_min = " << q(s.f_min_hz) << "\nflag_above = " << q(s.flag_above_hz) << "\nmin_pairs = " << s.min_pairs
    << "\nisolated_only = " << (s.isolated_only ? "true" : "false") << "\nband_limit = " << q(s.band_limit_hz)
    << "\ncompare_lo = " << q(s.compare_lo_hz) << "\ncompare_hi = " << q(s.compare_hi_hz) << "\n";
  return o.str();
}

}  // namespace dispersim
