#pragma once

// Degree-day demand correction. Daily demand totals are regressed on heating
// and cooling degree days; the remaining per-step-of-year profile becomes the
// baseline. Scenario demand = baseline + degree-day response, with each day's
// response spread evenly over its 8 steps.

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vrekit/weather_store.hpp"

namespace vrekit::demand {

struct DegreeDayParams {
  double heating_threshold = 17.0;  // degC
  double cooling_threshold = 22.0;  // degC

  void validate() const;
};

/// Day d = mean of steps 8d .. 8d+7. Throws LengthNotDivisible.
std::vector<double> daily_mean_temperature(std::span<const double> three_hourly);

struct DegreeDays {
  double heating = 0.0;
  double cooling = 0.0;
};

DegreeDays degree_days(double daily_temperature, const DegreeDayParams& params);

struct DegreeDaySeries {
  std::vector<double> heating;
  std::vector<double> cooling;
  [[nodiscard]] std::size_t days() const noexcept { return heating.size(); }
};

DegreeDaySeries degree_day_series(std::span<const double> daily_temperature, const DegreeDayParams& params);

struct DemandSeries {
  std::string country;
  weather::TimeAxis time;
  std::vector<double> values;  // MWh per 3-hour step
};

struct DemandRegression {
  std::string country;
  std::vector<double> baseline;  // one value per step of year, MWh
  double heating_coeff = 0.0;   // MWh of daily demand per degC-day
  double cooling_coeff = 0.0;
  double intercept = 0.0;       // OLS constant on daily totals
  double heating_se = 0.0;      // OLS standard errors; NaN when the regressor was dropped
  double cooling_se = 0.0;
  /// Neither degree-day series varies; coefficients are 0 and the baseline
  /// is the raw mean profile.
  bool singular = false;
};

/// OLS of daily totals on (1, HDD, CDD). Regressors without variation are
/// dropped; negative coefficients are clipped to 0.
DemandRegression fit_demand_regression(const DemandSeries& observed, const DegreeDaySeries& degree_days);

DemandSeries synthesize_demand(const DemandRegression& regression, const DegreeDaySeries& degree_days,
                               const weather::TimeAxis& time);

/// `country,time_index,mwh` -> per-country series, time indices contiguous from 0.
std::map<std::string, std::vector<double>> load_demand_file(const std::filesystem::path& path);
void write_demand_file(const std::filesystem::path& path, const std::vector<DemandSeries>& series);

void write_regressions(const std::filesystem::path& coefficients_path, const std::filesystem::path& baseline_path,
                       const std::vector<DemandRegression>& regressions);
std::vector<DemandRegression> load_regressions(const std::filesystem::path& coefficients_path,
                                               const std::filesystem::path& baseline_path);

}  // namespace vrekit::demand
