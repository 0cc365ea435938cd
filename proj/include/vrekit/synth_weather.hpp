#pragma once

// Deterministic desk-scale scenario generator.
//
// Produces a "true" climate and a biased climate-model view of it:
//  - wind: AR(1) in time on spatially correlated Gaussian innovations
//    (exponential correlation with distance), mapped to Rayleigh speeds with
//    a winter maximum;
//  - irradiance: clear-sky curve from solar elevation (exactly 0 when the sun
//    is below the horizon) times a correlated cloudiness process;
//  - temperature: latitude-dependent mean, seasonal and diurnal cycles,
//    correlated anomalies, plus a per-scenario warming level and linear trend;
//  - demand: diurnal and weekly structure plus a planted degree-day response.
// Reference capacity factors come from the true fields; the model fields are
// the true fields times per-model wind and irradiance bias factors.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vrekit/bias_adjust.hpp"
#include "vrekit/converters.hpp"
#include "vrekit/demand_model.hpp"
#include "vrekit/weather_store.hpp"

namespace vrekit::synth {

struct SynthScenario {
  std::string name;            // historical, RCP2.6, RCP4.5, RCP8.5
  int start_year = 1986;
  double warming_level = 0.0;  // degC above the historical climate at the start
  double warming_offset = 0.0; // degC added linearly across the period
  double wind_change = 0.0;    // relative change of mean wind speed
  double irradiance_change = 0.0;
};

struct SynthSpec {
  std::uint64_t seed = 7;
  int n_countries = 30;
  int cells_per_country = 2;
  int years = 20;
  double wind_spatial_corr_km = 600.0;
  double cloud_spatial_corr_km = 1500.0;
  double wind_ar = 0.94;                 // 3-hourly AR(1) coefficient
  double mean_wind_speed = 6.5;          // m/s at 10 m
  double seasonal_wind_amplitude = 0.1;
  double seasonal_temperature_amplitude = 9.0;
  double diurnal_temperature_amplitude = 4.0;
  double temperature_anomaly_sd = 1.0;   // short-memory anomalies, 3-hourly AR 0.8
  double demand_noise = 0.01;            // per-step noise sd relative to mean load
  double weekend_dip = 0.08;             // relative drop of weekend daily demand
  std::optional<double> wind_bias;       // drawn from the seed when unset
  std::optional<double> irradiance_bias;
  std::vector<SynthScenario> scenarios = default_scenarios();

  static std::vector<SynthScenario> default_scenarios();
  [[nodiscard]] std::string model_id() const;
  void validate() const;
};

/// Scenario file stem: "historical", "rcp26", ...
std::string scenario_slug(const std::string& name);

struct ScenarioFields {
  std::string scenario;
  weather::FieldSeries wind;
  weather::FieldSeries irradiance;
  weather::FieldSeries temperature;
};

struct PlantedDemand {
  std::string country;
  double mean_load = 0.0;  // MWh per step
  double heating_coeff = 0.0;
  double cooling_coeff = 0.0;
};

class SynthGenerator {
 public:
  explicit SynthGenerator(SynthSpec spec);

  [[nodiscard]] const SynthSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] const weather::GridDefinition& grid() const noexcept { return grid_; }
  [[nodiscard]] const weather::WeightTable& weights() const noexcept { return weights_; }
  [[nodiscard]] double wind_bias() const noexcept { return wind_bias_; }
  [[nodiscard]] double irradiance_bias() const noexcept { return irradiance_bias_; }
  [[nodiscard]] weather::TimeAxis time_axis(std::size_t scenario) const;

  /// Unbiased fields of a scenario (not quantized).
  [[nodiscard]] ScenarioFields truth(std::size_t scenario) const;
  /// The climate-model view: biased and quantized to the written precision.
  [[nodiscard]] ScenarioFields model_view(const ScenarioFields& truth) const;

  /// Every 3rd step of the true historical country CF (default models).
  [[nodiscard]] bias::ReferenceSamples reference_samples(const ScenarioFields& historical_truth) const;

  /// Observed demand on the historical axis, driven by the model-view
  /// historical temperature so the planted response is exactly identifiable.
  [[nodiscard]] std::vector<demand::DemandSeries> historical_demand(const ScenarioFields& historical_model) const;
  [[nodiscard]] const std::vector<PlantedDemand>& planted() const noexcept { return planted_; }

 private:
  SynthSpec spec_;
  weather::GridDefinition grid_;
  weather::WeightTable weights_;
  std::vector<std::string> cell_country_;
  double wind_bias_ = 1.0;
  double irradiance_bias_ = 1.0;
  std::vector<PlantedDemand> planted_;
};

struct SynthBundle {
  weather::GridDefinition grid;
  weather::WeightTable weights;
  std::vector<ScenarioFields> fields;  // model view, one per scenario
  bias::ReferenceSamples reference;
  std::vector<demand::DemandSeries> demand;
  std::vector<PlantedDemand> planted;
};

SynthBundle generate(const SynthSpec& spec);

/// Writes grid, weights, field files, demand, reference files and a run
/// config (`run.ini`) into `dir`. Returns the config path.
std::filesystem::path write_bundle(const SynthSpec& spec, const std::filesystem::path& dir);

/// The 30 country codes used by the generator, in generation order.
const std::vector<std::string>& european_countries();

}  // namespace vrekit::synth
