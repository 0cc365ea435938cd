#include "vrekit/converters.hpp"

#include <algorithm>
#include <cmath>

#include "vrekit/error.hpp"

namespace vrekit::convert {

std::string_view to_string(Technology t) { return t == Technology::Wind ? "wind" : "solar"; }

Technology parse_technology(std::string_view tag) {
  if (tag == "wind") return Technology::Wind;
  if (tag == "solar") return Technology::Solar;
  throw Error(ErrorKind::MalformedFile, "unknown technology '" + std::string(tag) + "'");
}

std::vector<PowerCurvePoint> WindTurbineModel::default_power_curve() {
  constexpr double cut_in = 4.0;
  constexpr double rated = 13.0;
  std::vector<PowerCurvePoint> curve;
  for (int u = 4; u <= 13; ++u) {
    const double s = u;
    const double cf = (s * s * s - cut_in * cut_in * cut_in) / (rated * rated * rated - cut_in * cut_in * cut_in);
    curve.push_back({s, cf});
  }
  curve.back().cf = 1.0;
  return curve;
}

double WindTurbineModel::height_factor() const { return std::pow(hub_height / reference_height, shear_exponent); }

void WindTurbineModel::validate() const {
  if (!(hub_height > 0.0) || !(reference_height > 0.0))
    throw Error(ErrorKind::InvalidArgument, "turbine heights must be positive");
  if (!std::isfinite(shear_exponent)) throw Error(ErrorKind::InvalidArgument, "shear exponent must be finite");
  if (power_curve.size() < 4) throw Error(ErrorKind::InvalidArgument, "power curve needs at least 4 points");
  for (std::size_t i = 0; i < power_curve.size(); ++i) {
    const auto& p = power_curve[i];
    if (!(p.cf >= 0.0 && p.cf <= 1.0)) throw Error(ErrorKind::InvalidArgument, "power curve CF outside [0,1]");
    if (!(p.speed >= 0.0)) throw Error(ErrorKind::InvalidArgument, "power curve speed must be non-negative");
    if (i > 0 && !(p.speed > power_curve[i - 1].speed))
      throw Error(ErrorKind::InvalidArgument, "power curve speeds must be strictly increasing");
  }
  if (power_curve.front().cf != 0.0) throw Error(ErrorKind::InvalidArgument, "power curve must start at CF 0 (cut-in)");
  if (!(cut_out_speed > power_curve.back().speed))
    throw Error(ErrorKind::InvalidArgument, "cut-out speed must exceed the last curve speed");
}

void SolarPanelModel::validate() const {
  if (!(stc_irradiance > 0.0)) throw Error(ErrorKind::InvalidArgument, "STC irradiance must be positive");
  if (!(temperature_coefficient >= -0.01 && temperature_coefficient <= 0.0))
    throw Error(ErrorKind::InvalidArgument, "temperature coefficient must lie in [-0.01, 0]");
  if (!(mounting_coefficient >= 0.0 && mounting_coefficient <= 0.06))
    throw Error(ErrorKind::InvalidArgument, "mounting coefficient must lie in [0, 0.06]");
  if (!std::isfinite(stc_cell_temperature)) throw Error(ErrorKind::InvalidArgument, "STC temperature must be finite");
}

double extrapolate_hub_speed(double u_ref, const WindTurbineModel& model) { return u_ref * model.height_factor(); }

double wind_capacity_factor(double u_hub, const WindTurbineModel& model) {
  const auto& curve = model.power_curve;
  if (u_hub >= model.cut_out_speed || u_hub <= curve.front().speed) return 0.0;
  if (u_hub >= curve.back().speed) return curve.back().cf;
  // First point with speed > u_hub; exists and is not the first element here.
  auto hi = std::upper_bound(curve.begin(), curve.end(), u_hub,
                             [](double u, const PowerCurvePoint& p) { return u < p.speed; });
  auto lo = hi - 1;
  if (u_hub == lo->speed) return lo->cf;
  const double frac = (u_hub - lo->speed) / (hi->speed - lo->speed);
  return lo->cf + frac * (hi->cf - lo->cf);
}

double solar_capacity_factor(double irradiance, double ambient_temperature, const SolarPanelModel& model) {
  if (irradiance <= 0.0) return 0.0;
  const double cell_temperature = ambient_temperature + model.mounting_coefficient * irradiance;
  const double cf = (irradiance / model.stc_irradiance) *
                    (1.0 + model.temperature_coefficient * (cell_temperature - model.stc_cell_temperature));
  return std::clamp(cf, 0.0, 1.0);
}

namespace {

void clamp_unit(std::vector<double>& values) {
  for (auto& v : values) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace

CapacityFactorSeries convert_wind_cf(const weather::FieldSeries& wind, const weather::CountryWeights& weights,
                                     const WindTurbineModel& model, double driver_scale) {
  if (wind.variable() != weather::Variable::WindSpeed)
    throw Error(ErrorKind::VariableMismatch, "wind conversion needs a wind_speed field");
  CapacityFactorSeries out{weights.country, Technology::Wind, wind.time(), std::vector<double>(wind.n_steps(), 0.0)};
  const double factor = model.height_factor() * driver_scale;
  for (const auto& e : weights.entries) {
    if (e.cell_id >= wind.cell_count())
      throw Error(ErrorKind::UnknownCell, "country " + weights.country + ": unknown cell " + std::to_string(e.cell_id));
    const auto series = wind.cell_series(e.cell_id);
    for (std::size_t t = 0; t < series.size(); ++t)
      out.values[t] += e.weight * wind_capacity_factor(series[t] * factor, model);
  }
  clamp_unit(out.values);
  return out;
}

CapacityFactorSeries convert_solar_cf(const weather::FieldSeries& irradiance, const weather::FieldSeries& temperature,
                                      const weather::CountryWeights& weights, const SolarPanelModel& model,
                                      double driver_scale) {
  if (irradiance.variable() != weather::Variable::Irradiance || temperature.variable() != weather::Variable::Temperature)
    throw Error(ErrorKind::VariableMismatch, "solar conversion needs irradiance and temperature fields");
  if (!(irradiance.time() == temperature.time()) || !(irradiance.grid() == temperature.grid()))
    throw Error(ErrorKind::AxisMismatch, "irradiance and temperature fields differ in grid or time axis");
  CapacityFactorSeries out{weights.country, Technology::Solar, irradiance.time(),
                           std::vector<double>(irradiance.n_steps(), 0.0)};
  for (const auto& e : weights.entries) {
    if (e.cell_id >= irradiance.cell_count())
      throw Error(ErrorKind::UnknownCell, "country " + weights.country + ": unknown cell " + std::to_string(e.cell_id));
    const auto g = irradiance.cell_series(e.cell_id);
    const auto ta = temperature.cell_series(e.cell_id);
    for (std::size_t t = 0; t < g.size(); ++t)
      out.values[t] += e.weight * solar_capacity_factor(g[t] * driver_scale, ta[t], model);
  }
  clamp_unit(out.values);
  return out;
}

}  // namespace vrekit::convert
