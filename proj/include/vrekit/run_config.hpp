#pragma once

// Run configuration: one INI-style file with sections.
//
//   [run]          alpha_grid, gamma, window_years, window_mode, capacity_quantile,
//                  export_mismatch_alpha, seed
//   [inputs]       grid, weights, weights_wind, weights_solar, weights_temperature,
//                  demand, reference_wind, reference_solar
//   [turbine]      hub_height, reference_height, shear_exponent, power_curve, cut_out_speed
//   [panel]        stc_irradiance, temperature_coefficient, stc_cell_temperature,
//                  mounting_coefficient
//   [degree_days]  heating_threshold, cooling_threshold
//   [bias]         bins, scale_min, scale_max, scale_step
//   [output]       directory
//   [model <id>]   <scenario>.wind, <scenario>.irradiance, <scenario>.temperature
//
// Relative paths resolve against the directory holding the config file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vrekit/bias_adjust.hpp"
#include "vrekit/converters.hpp"
#include "vrekit/demand_model.hpp"
#include "vrekit/metrics.hpp"
#include "vrekit/weather_store.hpp"

namespace vrekit::config {

struct ScenarioInputs {
  std::string scenario;
  std::filesystem::path wind;
  std::filesystem::path irradiance;
  std::filesystem::path temperature;
};

struct ModelInputs {
  std::string id;
  std::vector<ScenarioInputs> scenarios;  // config order; historical must be present
};

struct RunConfig {
  std::vector<double> alpha_grid = default_alpha_grid();
  double gamma = 1.0;
  int window_years = 20;
  metrics::WindowMode window_mode = metrics::WindowMode::NonOverlapping;
  std::optional<double> capacity_quantile;
  std::optional<double> export_mismatch_alpha;  // writes mismatch series for this alpha
  std::uint64_t seed = 7;

  std::filesystem::path grid;
  std::filesystem::path weights;
  std::filesystem::path weights_wind;  // optional per-variable overrides
  std::filesystem::path weights_solar;
  std::filesystem::path weights_temperature;
  std::filesystem::path demand;
  std::filesystem::path reference_wind;
  std::filesystem::path reference_solar;

  convert::WindTurbineModel turbine;
  convert::SolarPanelModel panel;
  demand::DegreeDayParams degree_days;
  std::size_t histogram_bins = bias::kDefaultBins;
  bias::ScaleGrid scale_grid;

  std::filesystem::path output_directory;
  std::vector<ModelInputs> models;

  static std::vector<double> default_alpha_grid();

  /// Weights file for a variable: the override when given, else `weights`.
  [[nodiscard]] const std::filesystem::path& weights_for(weather::Variable v) const;

  /// Value checks that need no file access. Throws InvalidArgument.
  void check_values() const;

  /// Canonical text with absolute paths; parsing it yields an equal config.
  [[nodiscard]] std::string to_ini() const;
};

std::string_view to_string(metrics::WindowMode mode);

/// Throws MalformedFile on syntax errors or unknown keys, InvalidArgument on bad values.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir);

/// Reads an INI config, or the resolved config stored in a run manifest (`.json`).
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace vrekit::config
