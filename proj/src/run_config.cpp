#include "vrekit/run_config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <json.hpp>
#include <sstream>

#include "vrekit/csv.hpp"
#include "vrekit/error.hpp"
#include "vrekit/mismatch.hpp"

namespace vrekit::config {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

[[noreturn]] void bad_value(std::string_view section, std::string_view key, std::string_view value) {
  throw Error(ErrorKind::InvalidArgument,
              "[" + std::string(section) + "] " + std::string(key) + ": cannot parse '" + std::string(value) + "'");
}

double to_double(std::string_view section, std::string_view key, const std::string& raw) {
  double v = 0.0;
  if (!csv::parse(csv::trim(raw), v) || !std::isfinite(v)) bad_value(section, key, raw);
  return v;
}

int to_int(std::string_view section, std::string_view key, const std::string& raw) {
  int v = 0;
  if (!csv::parse(csv::trim(raw), v)) bad_value(section, key, raw);
  return v;
}

std::vector<double> to_list(std::string_view section, std::string_view key, const std::string& raw) {
  std::vector<std::string_view> parts;
  csv::split(raw, parts);
  std::vector<double> out;
  for (auto p : parts) out.push_back(to_double(section, key, std::string(p)));
  return out;
}

fs::path to_path(const fs::path& base, const std::string& raw) {
  const auto s = csv::trim(raw);
  if (s.empty()) return {};
  fs::path p{std::string(s)};
  return (p.is_absolute() ? p : base / p).lexically_normal();
}

std::vector<convert::PowerCurvePoint> to_curve(std::string_view section, std::string_view key, const std::string& raw) {
  std::vector<std::string_view> parts;
  csv::split(raw, parts);
  std::vector<convert::PowerCurvePoint> out;
  for (auto p : parts) {
    const auto colon = p.find(':');
    if (colon == std::string_view::npos) bad_value(section, key, raw);
    double speed = 0.0;
    double cf = 0.0;
    if (!csv::parse(csv::trim(p.substr(0, colon)), speed) || !csv::parse(csv::trim(p.substr(colon + 1)), cf))
      bad_value(section, key, raw);
    out.push_back({speed, cf});
  }
  return out;
}

[[noreturn]] void unknown_key(std::string_view section, std::string_view key) {
  throw Error(ErrorKind::MalformedFile, "unknown key [" + std::string(section) + "] " + std::string(key));
}

void append_kv(std::string& out, std::string_view key, const auto& value) {
  out.append(key);
  out.append(" = ");
  csv::append(out, value);
  out.push_back('\n');
}

void append_path(std::string& out, std::string_view key, const fs::path& p) {
  if (!p.empty()) append_kv(out, key, p.string());
}

void apply_section(RunConfig& cfg, const std::string& section, const pt::ptree& body, const fs::path& base) {
  for (const auto& [key, node] : body) {
    const auto& raw = node.data();
    if (section == "run") {
      if (key == "alpha_grid") cfg.alpha_grid = to_list(section, key, raw);
      else if (key == "gamma") cfg.gamma = to_double(section, key, raw);
      else if (key == "window_years") cfg.window_years = to_int(section, key, raw);
      else if (key == "window_mode") {
        const auto m = csv::trim(raw);
        if (m == "non_overlapping") cfg.window_mode = metrics::WindowMode::NonOverlapping;
        else if (m == "rolling") cfg.window_mode = metrics::WindowMode::Rolling;
        else bad_value(section, key, raw);
      } else if (key == "capacity_quantile") {
        cfg.capacity_quantile = to_double(section, key, raw);
      } else if (key == "export_mismatch_alpha") {
        cfg.export_mismatch_alpha = to_double(section, key, raw);
      } else if (key == "seed") {
        std::size_t s = 0;
        if (!csv::parse(csv::trim(raw), s)) bad_value(section, key, raw);
        cfg.seed = s;
      } else {
        unknown_key(section, key);
      }
    } else if (section == "inputs") {
      const auto p = to_path(base, raw);
      if (key == "grid") cfg.grid = p;
      else if (key == "weights") cfg.weights = p;
      else if (key == "weights_wind") cfg.weights_wind = p;
      else if (key == "weights_solar") cfg.weights_solar = p;
      else if (key == "weights_temperature") cfg.weights_temperature = p;
      else if (key == "demand") cfg.demand = p;
      else if (key == "reference_wind") cfg.reference_wind = p;
      else if (key == "reference_solar") cfg.reference_solar = p;
      else unknown_key(section, key);
    } else if (section == "turbine") {
      if (key == "hub_height") cfg.turbine.hub_height = to_double(section, key, raw);
      else if (key == "reference_height") cfg.turbine.reference_height = to_double(section, key, raw);
      else if (key == "shear_exponent") cfg.turbine.shear_exponent = to_double(section, key, raw);
      else if (key == "power_curve") cfg.turbine.power_curve = to_curve(section, key, raw);
      else if (key == "cut_out_speed") cfg.turbine.cut_out_speed = to_double(section, key, raw);
      else unknown_key(section, key);
    } else if (section == "panel") {
      if (key == "stc_irradiance") cfg.panel.stc_irradiance = to_double(section, key, raw);
      else if (key == "temperature_coefficient") cfg.panel.temperature_coefficient = to_double(section, key, raw);
      else if (key == "stc_cell_temperature") cfg.panel.stc_cell_temperature = to_double(section, key, raw);
      else if (key == "mounting_coefficient") cfg.panel.mounting_coefficient = to_double(section, key, raw);
      else unknown_key(section, key);
    } else if (section == "degree_days") {
      if (key == "heating_threshold") cfg.degree_days.heating_threshold = to_double(section, key, raw);
      else if (key == "cooling_threshold") cfg.degree_days.cooling_threshold = to_double(section, key, raw);
      else unknown_key(section, key);
    }
  }
}

void apply_bias(RunConfig& cfg, const pt::ptree& body) {
  double lo = 0.5;
  double hi = 2.0;
  double step = 0.01;
  for (const auto& [key, node] : body) {
    const auto& raw = node.data();
    if (key == "bins") {
      cfg.histogram_bins = static_cast<std::size_t>(std::max(0, to_int("bias", key, raw)));
    } else if (key == "scale_min") {
      lo = to_double("bias", key, raw);
    } else if (key == "scale_max") {
      hi = to_double("bias", key, raw);
    } else if (key == "scale_step") {
      step = to_double("bias", key, raw);
    } else {
      unknown_key("bias", key);
    }
  }
  cfg.scale_grid = bias::ScaleGrid::from_range(lo, hi, step);
}

void apply_model(RunConfig& cfg, const std::string& id, const pt::ptree& body, const fs::path& base) {
  if (id.empty()) throw Error(ErrorKind::MalformedFile, "model section without an id");
  ModelInputs model{id, {}};
  for (const auto& [key, node] : body) {
    const auto dot = key.rfind('.');
    if (dot == std::string::npos || dot == 0) unknown_key("model " + id, key);
    const auto scenario = key.substr(0, dot);
    const auto variable = key.substr(dot + 1);
    auto it = std::find_if(model.scenarios.begin(), model.scenarios.end(),
                           [&](const ScenarioInputs& s) { return s.scenario == scenario; });
    if (it == model.scenarios.end()) {
      model.scenarios.push_back({scenario, {}, {}, {}});
      it = std::prev(model.scenarios.end());
    }
    const auto p = to_path(base, node.data());
    if (variable == "wind") it->wind = p;
    else if (variable == "irradiance") it->irradiance = p;
    else if (variable == "temperature") it->temperature = p;
    else unknown_key("model " + id, key);
  }
  cfg.models.push_back(std::move(model));
}

}  // namespace

std::vector<double> RunConfig::default_alpha_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

const fs::path& RunConfig::weights_for(weather::Variable v) const {
  const fs::path* override_path = nullptr;
  switch (v) {
    case weather::Variable::WindSpeed: override_path = &weights_wind; break;
    case weather::Variable::Irradiance: override_path = &weights_solar; break;
    case weather::Variable::Temperature: override_path = &weights_temperature; break;
  }
  return override_path->empty() ? weights : *override_path;
}

void RunConfig::check_values() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidArgument, msg); };
  if (alpha_grid.empty()) fail("alpha grid is empty");
  for (double a : alpha_grid)
    if (!(a >= 0.0 && a <= 1.0)) fail("alpha " + csv::format(a) + " is outside [0,1]");
  if (!(gamma > 0.0)) fail("gamma must be positive");
  if (window_years < 1) fail("window length must be at least one year");
  if (capacity_quantile && !(*capacity_quantile > 0.0 && *capacity_quantile <= 1.0))
    fail("capacity quantile must lie in (0,1]");
  if (export_mismatch_alpha && !(*export_mismatch_alpha >= 0.0 && *export_mismatch_alpha <= 1.0))
    fail("export_mismatch_alpha must lie in [0,1]");
  turbine.validate();
  panel.validate();
  degree_days.validate();
  if (histogram_bins < 2) fail("at least 2 histogram bins are required");
  if (scale_grid.values().empty()) throw Error(ErrorKind::SearchGridEmpty, "bias scale grid is empty");
  if (scale_grid.first <= 0) fail("bias scales must be positive");
  if (models.empty()) fail("no [model <id>] section");
  for (const auto& m : models) {
    bool has_historical = false;
    for (const auto& s : m.scenarios) {
      if (!mismatch::is_known_scenario(s.scenario)) fail("model " + m.id + ": unknown scenario '" + s.scenario + "'");
      if (s.wind.empty() || s.irradiance.empty() || s.temperature.empty())
        fail("model " + m.id + ", scenario " + s.scenario + ": wind, irradiance and temperature are all required");
      has_historical |= s.scenario == "historical";
    }
    if (!has_historical) fail("model " + m.id + " has no historical scenario");
  }
}

std::string_view to_string(metrics::WindowMode mode) {
  return mode == metrics::WindowMode::Rolling ? "rolling" : "non_overlapping";
}

std::string RunConfig::to_ini() const {
  std::string out = "[run]\n";
  std::string alphas;
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (i) alphas.push_back(',');
    csv::append(alphas, alpha_grid[i]);
  }
  append_kv(out, "alpha_grid", alphas);
  append_kv(out, "gamma", gamma);
  append_kv(out, "window_years", window_years);
  append_kv(out, "window_mode", to_string(window_mode));
  if (capacity_quantile) append_kv(out, "capacity_quantile", *capacity_quantile);
  if (export_mismatch_alpha) append_kv(out, "export_mismatch_alpha", *export_mismatch_alpha);
  append_kv(out, "seed", static_cast<long long>(seed));

  out += "\n[inputs]\n";
  append_path(out, "grid", grid);
  append_path(out, "weights", weights);
  append_path(out, "weights_wind", weights_wind);
  append_path(out, "weights_solar", weights_solar);
  append_path(out, "weights_temperature", weights_temperature);
  append_path(out, "demand", demand);
  append_path(out, "reference_wind", reference_wind);
  append_path(out, "reference_solar", reference_solar);

  out += "\n[turbine]\n";
  append_kv(out, "hub_height", turbine.hub_height);
  append_kv(out, "reference_height", turbine.reference_height);
  append_kv(out, "shear_exponent", turbine.shear_exponent);
  std::string curve;
  for (std::size_t i = 0; i < turbine.power_curve.size(); ++i) {
    if (i) curve.push_back(',');
    csv::append(curve, turbine.power_curve[i].speed);
    curve.push_back(':');
    csv::append(curve, turbine.power_curve[i].cf);
  }
  append_kv(out, "power_curve", curve);
  append_kv(out, "cut_out_speed", turbine.cut_out_speed);

  out += "\n[panel]\n";
  append_kv(out, "stc_irradiance", panel.stc_irradiance);
  append_kv(out, "temperature_coefficient", panel.temperature_coefficient);
  append_kv(out, "stc_cell_temperature", panel.stc_cell_temperature);
  append_kv(out, "mounting_coefficient", panel.mounting_coefficient);

  out += "\n[degree_days]\n";
  append_kv(out, "heating_threshold", degree_days.heating_threshold);
  append_kv(out, "cooling_threshold", degree_days.cooling_threshold);

  out += "\n[bias]\n";
  append_kv(out, "bins", histogram_bins);
  const double den = scale_grid.denominator;
  append_kv(out, "scale_min", scale_grid.first / den);
  append_kv(out, "scale_max", scale_grid.last / den);
  append_kv(out, "scale_step", scale_grid.stride / den);

  if (!output_directory.empty()) {
    out += "\n[output]\n";
    append_path(out, "directory", output_directory);
  }
  for (const auto& m : models) {
    out += "\n[model " + m.id + "]\n";
    for (const auto& s : m.scenarios) {
      append_path(out, s.scenario + ".wind", s.wind);
      append_path(out, s.scenario + ".irradiance", s.irradiance);
      append_path(out, s.scenario + ".temperature", s.temperature);
    }
  }
  return out;
}

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::MalformedFile, "config line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig cfg;
  const auto base = fs::absolute(base_dir);
  for (const auto& [name, body] : tree) {
    if (!body.data().empty()) throw Error(ErrorKind::MalformedFile, "config key '" + name + "' outside a section");
    if (name == "run" || name == "inputs" || name == "turbine" || name == "panel" || name == "degree_days") {
      apply_section(cfg, name, body, base);
    } else if (name == "bias") {
      apply_bias(cfg, body);
    } else if (name == "output") {
      for (const auto& [key, node] : body) {
        if (key != "directory") unknown_key(name, key);
        cfg.output_directory = to_path(base, node.data());
      }
    } else if (name.rfind("model", 0) == 0 && (name.size() == 5 || name[5] == ' ')) {
      apply_model(cfg, std::string(csv::trim(std::string_view(name).substr(5))), body, base);
    } else {
      throw Error(ErrorKind::MalformedFile, "unknown config section [" + name + "]");
    }
  }
  cfg.check_values();
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  const auto text = csv::read_file(path);
  const auto base = fs::absolute(path).parent_path();
  if (path.extension() == ".json") {
    nlohmann::json manifest;
    try {
      manifest = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::MalformedFile, path.string() + ": " + e.what());
    }
    if (!manifest.contains("resolved_config") || !manifest["resolved_config"].is_string())
      throw Error(ErrorKind::MalformedFile, path.string() + ": manifest has no resolved_config");
    return parse_run_config(manifest["resolved_config"].get<std::string>(), base);
  }
  return parse_run_config(text, base);
}

}  // namespace vrekit::config
