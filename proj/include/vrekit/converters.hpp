#pragma once

// Weather-to-capacity-factor conversion. Cells are converted first and then
// aggregated with country weights, since both models are nonlinear in the
// driver.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrekit/weather_store.hpp"

namespace vrekit::convert {

enum class Technology { Wind, Solar };

std::string_view to_string(Technology t);
Technology parse_technology(std::string_view tag);  // throws MalformedFile

struct PowerCurvePoint {
  double speed = 0.0;  // m/s at hub height
  double cf = 0.0;
};

/// Turbine with a tabulated power curve. The first curve point is the cut-in
/// speed (CF 0); output holds the last tabulated CF from the last curve point
/// up to `cut_out_speed`, and is 0 at and above it.
struct WindTurbineModel {
  double hub_height = 80.0;
  double reference_height = 10.0;
  double shear_exponent = 0.143;
  std::vector<PowerCurvePoint> power_curve = default_power_curve();
  double cut_out_speed = 25.0;

  /// Cut-in 4 m/s, rated 13 m/s, tabulated at 1 m/s with the cubic law.
  static std::vector<PowerCurvePoint> default_power_curve();

  /// (hub_height / reference_height)^shear_exponent.
  [[nodiscard]] double height_factor() const;

  /// Throws InvalidArgument if any type invariant is violated.
  void validate() const;
};

struct SolarPanelModel {
  double stc_irradiance = 1000.0;       // W/m^2
  double temperature_coefficient = -0.004;  // per degC
  double stc_cell_temperature = 25.0;   // degC
  double mounting_coefficient = 0.035;  // degC m^2 / W

  void validate() const;
};

/// Power-law shear profile.
double extrapolate_hub_speed(double u_ref, const WindTurbineModel& model);

double wind_capacity_factor(double u_hub, const WindTurbineModel& model);

/// Cell temperature rises linearly with irradiance; efficiency falls
/// linearly with cell temperature above STC. Clamped to [0, 1].
double solar_capacity_factor(double irradiance, double ambient_temperature, const SolarPanelModel& model);

struct CapacityFactorSeries {
  std::string country;
  Technology technology = Technology::Wind;
  weather::TimeAxis time;
  std::vector<double> values;
};

/// Country wind CF from a 10 m wind field. `driver_scale` multiplies every
/// wind speed before conversion (used by bias adjustment).
CapacityFactorSeries convert_wind_cf(const weather::FieldSeries& wind, const weather::CountryWeights& weights,
                                     const WindTurbineModel& model, double driver_scale = 1.0);

/// Country solar CF; `driver_scale` multiplies irradiance before conversion.
CapacityFactorSeries convert_solar_cf(const weather::FieldSeries& irradiance, const weather::FieldSeries& temperature,
                                      const weather::CountryWeights& weights, const SolarPanelModel& model,
                                      double driver_scale = 1.0);

}  // namespace vrekit::convert
