#include "vrekit/synth_weather.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "vrekit/csv.hpp"
#include "vrekit/error.hpp"
#include "vrekit/mismatch.hpp"

namespace vrekit::synth {

using weather::FieldSeries;
using weather::kStepsPerDay;
using weather::Variable;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
constexpr double kEarthRadiusKm = 6371.0;

struct CountryInfo {
  const char* code;
  double lat;
  double lon;
  double annual_twh;  // sets the mean load
};

// Approximate centroids and annual consumption.
constexpr std::array<CountryInfo, 30> kCountries{{
    {"DE", 51.1, 10.4, 550}, {"FR", 46.6, 2.4, 470},  {"GB", 53.0, -1.5, 330}, {"IT", 42.8, 12.5, 310},
    {"ES", 40.2, -3.6, 250}, {"PL", 52.1, 19.4, 150}, {"SE", 62.0, 15.0, 135}, {"NO", 61.0, 9.0, 125},
    {"NL", 52.2, 5.5, 110},  {"BE", 50.6, 4.6, 85},   {"FI", 64.0, 26.0, 85},  {"AT", 47.6, 14.1, 70},
    {"CZ", 49.8, 15.5, 65},  {"CH", 46.8, 8.2, 60},   {"RO", 45.9, 24.9, 55},  {"GR", 39.3, 22.0, 55},
    {"PT", 39.6, -8.0, 50},  {"HU", 47.2, 19.4, 40},  {"BG", 42.7, 25.3, 35},  {"RS", 44.0, 20.9, 35},
    {"DK", 56.0, 9.5, 33},   {"SK", 48.7, 19.7, 28},  {"IE", 53.2, -8.0, 27},  {"HR", 45.1, 15.7, 17},
    {"SI", 46.1, 14.8, 14},  {"BA", 44.2, 17.8, 12},  {"LT", 55.3, 23.9, 11},  {"EE", 58.7, 25.5, 8},
    {"LV", 56.9, 24.6, 7},   {"LU", 49.8, 6.1, 6},
}};

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t scenario, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(scenario), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

double distance_km(const weather::GridCell& a, const weather::GridCell& b) {
  const double dlat = (b.lat - a.lat) * kDeg;
  const double dlon = (b.lon - a.lon) * kDeg;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

/// Lower Cholesky factor of exp(-d / length).
Eigen::MatrixXd correlation_factor(const weather::GridDefinition& grid, double length_km) {
  const auto n = static_cast<Eigen::Index>(grid.cell_count());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      c(i, j) = std::exp(-distance_km(grid.cells[static_cast<std::size_t>(i)], grid.cells[static_cast<std::size_t>(j)]) /
                         length_km);
  c.diagonal().array() += 1e-10;
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::InvalidArgument, "spatial correlation is not positive definite");
  return llt.matrixL();
}

/// AR(1) field with unit marginal variance and the given spatial factor.
class CorrelatedAr {
 public:
  CorrelatedAr(const Eigen::MatrixXd& factor, double ar, std::mt19937_64 rng)
      : factor_(factor), ar_(ar), innovation_(std::sqrt(1.0 - ar * ar)), rng_(std::move(rng)),
        eps_(factor.rows()), state_(factor.rows()) {
    draw();
    state_ = eps_;
  }

  void step() {
    draw();
    state_ = ar_ * state_ + innovation_ * eps_;
  }
  [[nodiscard]] double operator[](std::size_t i) const { return state_(static_cast<Eigen::Index>(i)); }

 private:
  void draw() {
    Eigen::VectorXd raw(factor_.rows());
    for (Eigen::Index i = 0; i < raw.size(); ++i) raw(i) = normal_(rng_);
    eps_.noalias() = factor_.triangularView<Eigen::Lower>() * raw;
  }

  const Eigen::MatrixXd& factor_;
  double ar_;
  double innovation_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  Eigen::VectorXd eps_;
  Eigen::VectorXd state_;
};

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double quantize(double x, double scale) { return std::round(x * scale) / scale; }

}  // namespace

std::vector<SynthScenario> SynthSpec::default_scenarios() {
  return {
      {"historical", 1986, 0.0, 0.0, 0.0, 0.0},
      {"RCP4.5", 2080, 2.2, 0.3, -0.005, -0.02},
      {"RCP8.5", 2080, 3.8, 0.9, -0.02, -0.03},
  };
}

std::string SynthSpec::model_id() const { return "SYN-" + std::to_string(seed); }

void SynthSpec::validate() const {
  if (n_countries < 1 || n_countries > static_cast<int>(kCountries.size()))
    throw Error(ErrorKind::InvalidArgument, "n_countries must lie in [1, 30]");
  if (cells_per_country < 1 || years < 1) throw Error(ErrorKind::InvalidArgument, "counts must be positive");
  if (!(wind_spatial_corr_km > 0.0) || !(cloud_spatial_corr_km > 0.0))
    throw Error(ErrorKind::InvalidArgument, "correlation lengths must be positive");
  if (!(wind_ar > 0.0 && wind_ar < 1.0)) throw Error(ErrorKind::InvalidArgument, "wind AR coefficient must lie in (0,1)");
  if (!(mean_wind_speed > 0.0)) throw Error(ErrorKind::InvalidArgument, "mean wind speed must be positive");
  if (!(demand_noise >= 0.0) || !(weekend_dip >= 0.0 && weekend_dip < 0.5))
    throw Error(ErrorKind::InvalidArgument, "demand noise and weekend dip must be small and non-negative");
  if (scenarios.empty() || scenarios.front().name != "historical")
    throw Error(ErrorKind::InvalidArgument, "the first synthetic scenario must be 'historical'");
  for (const auto& s : scenarios)
    if (!mismatch::is_known_scenario(s.name)) throw Error(ErrorKind::InvalidArgument, "unknown scenario " + s.name);
  for (auto b : {wind_bias, irradiance_bias})
    if (b && !(*b > 0.0)) throw Error(ErrorKind::InvalidArgument, "bias factors must be positive");
}

std::string scenario_slug(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (c == '.') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

const std::vector<std::string>& european_countries() {
  static const std::vector<std::string> codes = [] {
    std::vector<std::string> v;
    for (const auto& c : kCountries) v.emplace_back(c.code);
    return v;
  }();
  return codes;
}

SynthGenerator::SynthGenerator(SynthSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  auto rng = make_rng(spec_.seed, 0xffff, 0);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  std::vector<std::pair<std::string, std::vector<std::size_t>>> assignment;
  for (int n = 0; n < spec_.n_countries; ++n) {
    const auto& info = kCountries[static_cast<std::size_t>(n)];
    std::vector<std::size_t> cells;
    for (int k = 0; k < spec_.cells_per_country; ++k) {
      const double radius = spec_.cells_per_country == 1 ? 0.0 : 1.2;
      const double angle = 2.0 * kPi * k / spec_.cells_per_country + jitter(rng);
      weather::GridCell cell{std::clamp(info.lat + radius * std::sin(angle) + jitter(rng), -89.0, 89.0),
                             std::clamp(info.lon + radius * std::cos(angle) + jitter(rng), -179.0, 179.0)};
      cells.push_back(grid_.cells.size());
      grid_.cells.push_back(cell);
      cell_country_.emplace_back(info.code);
    }
    assignment.emplace_back(info.code, std::move(cells));
  }
  weights_ = weather::uniform_weights(assignment);
  std::uniform_real_distribution<double> wind_draw(0.85, 1.15);
  std::uniform_real_distribution<double> irr_draw(0.9, 1.1);
  const double wb = wind_draw(rng);
  const double ib = irr_draw(rng);
  wind_bias_ = spec_.wind_bias.value_or(wb);
  irradiance_bias_ = spec_.irradiance_bias.value_or(ib);

  for (int n = 0; n < spec_.n_countries; ++n) {
    const auto& info = kCountries[static_cast<std::size_t>(n)];
    PlantedDemand p;
    p.country = info.code;
    p.mean_load = info.annual_twh * 1e6 / weather::kStepsPerYear;
    const double daily = p.mean_load * kStepsPerDay;
    // Fraction of daily demand per degC-day: electric heating grows northward,
    // cooling only matters in the south.
    const double heating = std::clamp(0.006 + 0.0006 * (info.lat - 40.0), 0.004, 0.02);
    const double cooling = 0.012 * std::clamp((46.0 - info.lat) / 6.0, 0.0, 1.0);
    p.heating_coeff = heating * daily;
    p.cooling_coeff = cooling * daily;
    planted_.push_back(p);
  }
}

weather::TimeAxis SynthGenerator::time_axis(std::size_t scenario) const {
  return {spec_.scenarios.at(scenario).start_year, weather::kStepsPerYear,
          static_cast<std::size_t>(spec_.years) * weather::kStepsPerYear};
}

ScenarioFields SynthGenerator::truth(std::size_t index) const {
  const auto& sc = spec_.scenarios.at(index);
  const auto axis = time_axis(index);
  const std::size_t n_steps = axis.n_steps;
  const std::size_t n_cells = grid_.cell_count();

  const auto wind_factor = correlation_factor(grid_, spec_.wind_spatial_corr_km);
  const auto cloud_factor = correlation_factor(grid_, spec_.cloud_spatial_corr_km);
  CorrelatedAr wind_state(wind_factor, spec_.wind_ar, make_rng(spec_.seed, index, 1));
  CorrelatedAr cloud_state(cloud_factor, 0.9, make_rng(spec_.seed, index, 2));
  CorrelatedAr temp_state(wind_factor, 0.8, make_rng(spec_.seed, index, 3));

  std::vector<double> site_scale(n_cells);
  {
    auto rng = make_rng(spec_.seed, 0xffff, 1);
    std::uniform_real_distribution<double> coast(0.9, 1.1);
    for (std::size_t c = 0; c < n_cells; ++c) {
      const double site = 1.0 + 0.012 * (grid_.cells[c].lat - 48.0);
      // Rayleigh mean is lambda * Gamma(1.5).
      site_scale[c] = spec_.mean_wind_speed * site * coast(rng) / 0.886226925452758;
    }
  }

  std::vector<double> wind(n_steps * n_cells);
  std::vector<double> irr(n_steps * n_cells);
  std::vector<double> temp(n_steps * n_cells);
  for (std::size_t t = 0; t < n_steps; ++t) {
    if (t > 0) {
      wind_state.step();
      cloud_state.step();
      temp_state.step();
    }
    const std::size_t day = t / kStepsPerDay;
    const int doy = static_cast<int>(day % weather::kDaysPerYear);
    const int slot = static_cast<int>(t % kStepsPerDay);
    const double season = std::cos(2.0 * kPi * (doy - 15) / 365.0);
    const double declination = 23.44 * kDeg * std::sin(2.0 * kPi * (284 + doy + 1) / 365.0);
    const double trend = sc.warming_level + sc.warming_offset * static_cast<double>(t) / static_cast<double>(n_steps);
    for (std::size_t c = 0; c < n_cells; ++c) {
      const auto& cell = grid_.cells[c];
      const double local_hour = 3.0 * slot + 1.5 + cell.lon / 15.0;
      const std::size_t idx = c * n_steps + t;

      const double lambda = site_scale[c] * (1.0 + spec_.seasonal_wind_amplitude * season) * (1.0 + sc.wind_change);
      const double tail = std::max(0.5 * std::erfc(wind_state[c] / std::numbers::sqrt2), 1e-300);
      wind[idx] = lambda * std::sqrt(-std::log(tail));

      const double lat = cell.lat * kDeg;
      const double hour_angle = 15.0 * kDeg * (local_hour - 12.0);
      const double sin_elev =
          std::sin(lat) * std::sin(declination) + std::cos(lat) * std::cos(declination) * std::cos(hour_angle);
      if (sin_elev > 0.0) {
        const double clearness = 0.25 + 0.72 * normal_cdf(cloud_state[c] + 0.04 * (46.0 - cell.lat));
        irr[idx] = 1000.0 * std::pow(sin_elev, 1.2) * clearness * (1.0 + sc.irradiance_change);
      } else {
        irr[idx] = 0.0;
      }

      const double amplitude = spec_.seasonal_temperature_amplitude * (1.0 + 0.02 * (cell.lat - 45.0));
      const double value = (30.0 - 0.42 * cell.lat) - amplitude * season +
                           spec_.diurnal_temperature_amplitude * std::cos(2.0 * kPi * (local_hour - 15.0) / 24.0) +
                           spec_.temperature_anomaly_sd * temp_state[c] + trend;
      temp[idx] = std::clamp(value, -89.0, 59.0);
    }
  }
  return {sc.name, FieldSeries(Variable::WindSpeed, grid_, axis, std::move(wind)),
          FieldSeries(Variable::Irradiance, grid_, axis, std::move(irr)),
          FieldSeries(Variable::Temperature, grid_, axis, std::move(temp))};
}

ScenarioFields SynthGenerator::model_view(const ScenarioFields& truth) const {
  auto transform = [](const FieldSeries& f, double factor, double scale) {
    std::vector<double> v(f.values());
    for (auto& x : v) x = std::max(0.0, quantize(x * factor, scale));
    return v;
  };
  auto temps = truth.temperature.values();
  for (auto& x : temps) x = quantize(x, 100.0);
  return {truth.scenario,
          FieldSeries(Variable::WindSpeed, grid_, truth.wind.time(), transform(truth.wind, wind_bias_, 1000.0)),
          FieldSeries(Variable::Irradiance, grid_, truth.irradiance.time(),
                      transform(truth.irradiance, irradiance_bias_, 100.0)),
          FieldSeries(Variable::Temperature, grid_, truth.temperature.time(), std::move(temps))};
}

bias::ReferenceSamples SynthGenerator::reference_samples(const ScenarioFields& historical_truth) const {
  const convert::WindTurbineModel turbine;
  const convert::SolarPanelModel panel;
  bias::ReferenceSamples out;
  for (const auto& cw : weights_) {
    const auto w = convert::convert_wind_cf(historical_truth.wind, cw, turbine);
    const auto s = convert::convert_solar_cf(historical_truth.irradiance, historical_truth.temperature, cw, panel);
    auto& wv = out[{cw.country, convert::Technology::Wind}];
    auto& sv = out[{cw.country, convert::Technology::Solar}];
    for (std::size_t t = 0; t < w.values.size(); t += 3) {
      wv.push_back(w.values[t]);
      sv.push_back(s.values[t]);
    }
  }
  return out;
}

std::vector<demand::DemandSeries> SynthGenerator::historical_demand(const ScenarioFields& historical_model) const {
  const demand::DegreeDayParams params;
  const auto axis = historical_model.temperature.time();
  const std::size_t n_steps = axis.n_steps;
  const std::size_t n_days = n_steps / kStepsPerDay;
  auto rng = make_rng(spec_.seed, 0, 4);
  std::normal_distribution<double> normal;
  std::vector<demand::DemandSeries> out;
  for (const auto& planted : planted_) {
    const auto& cw = weather::find_country(weights_, planted.country);
    const auto temperature = weather::aggregate_to_country(historical_model.temperature, cw);
    const auto dd = demand::degree_day_series(demand::daily_mean_temperature(temperature), params);

    // Weekend dip in daily totals, made orthogonal to (1, HDD, CDD) so the
    // planted response stays exactly identifiable by least squares.
    const double daily_mean = planted.mean_load * kStepsPerDay;
    Eigen::VectorXd weekly(static_cast<Eigen::Index>(n_days));
    for (std::size_t d = 0; d < n_days; ++d) {
      const auto wd = d % 7;
      weekly(static_cast<Eigen::Index>(d)) = wd == 5 ? -spec_.weekend_dip * daily_mean
                                             : wd == 6 ? -1.4 * spec_.weekend_dip * daily_mean
                                                       : 0.0;
    }
    std::vector<const std::vector<double>*> regressors;
    auto varies = [](const std::vector<double>& v) {
      return std::any_of(v.begin(), v.end(), [&](double x) { return x != v.front(); });
    };
    if (varies(dd.heating)) regressors.push_back(&dd.heating);
    if (varies(dd.cooling)) regressors.push_back(&dd.cooling);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n_days), static_cast<Eigen::Index>(1 + regressors.size()));
    for (std::size_t d = 0; d < n_days; ++d) {
      const auto i = static_cast<Eigen::Index>(d);
      x(i, 0) = 1.0;
      for (std::size_t r = 0; r < regressors.size(); ++r) x(i, static_cast<Eigen::Index>(r + 1)) = (*regressors[r])[d];
    }
    const Eigen::VectorXd projection = x * x.colPivHouseholderQr().solve(weekly);
    const Eigen::VectorXd orthogonal = weekly - projection;

    demand::DemandSeries series{planted.country, axis, std::vector<double>(n_steps)};
    const double lon = [&] {
      double acc = 0.0;
      for (const auto& e : cw.entries) acc += e.weight * grid_.cells[e.cell_id].lon;
      return acc;
    }();
    for (std::size_t t = 0; t < n_steps; ++t) {
      const std::size_t d = t / kStepsPerDay;
      const int slot = static_cast<int>(t % kStepsPerDay);
      const double h = 3.0 * slot + 1.5 + lon / 15.0;
      // Zero-sum over the 8 equally spaced steps of a day.
      const double diurnal = 1.0 + 0.15 * std::cos(2.0 * kPi * (h - 14.0) / 24.0) +
                             0.05 * std::cos(2.0 * kPi * (h - 19.0) / 12.0);
      double v = planted.mean_load * diurnal +
                 (orthogonal(static_cast<Eigen::Index>(d)) + planted.heating_coeff * dd.heating[d] +
                  planted.cooling_coeff * dd.cooling[d]) /
                     kStepsPerDay;
      if (spec_.demand_noise > 0.0) v += spec_.demand_noise * planted.mean_load * normal(rng);
      series.values[t] = std::max(v, 0.05 * planted.mean_load);
    }
    out.push_back(std::move(series));
  }
  return out;
}

SynthBundle generate(const SynthSpec& spec) {
  SynthGenerator gen(spec);
  SynthBundle b{gen.grid(), gen.weights(), {}, {}, {}, gen.planted()};
  for (std::size_t i = 0; i < spec.scenarios.size(); ++i) {
    auto truth = gen.truth(i);
    if (i == 0) b.reference = gen.reference_samples(truth);
    b.fields.push_back(gen.model_view(truth));
  }
  b.demand = gen.historical_demand(b.fields.front());
  return b;
}

std::filesystem::path write_bundle(const SynthSpec& spec, const std::filesystem::path& dir) {
  SynthGenerator gen(spec);
  std::filesystem::create_directories(dir / "fields");
  weather::write_grid_definition(dir / "grid.csv", gen.grid());
  weather::write_country_weights(dir / "weights.csv", gen.weights());

  std::string model_section = "[model " + spec.model_id() + "]\n";
  for (std::size_t i = 0; i < spec.scenarios.size(); ++i) {
    const auto truth = gen.truth(i);
    const auto view = gen.model_view(truth);
    const auto slug = scenario_slug(view.scenario);
    if (i == 0) {
      const auto reference = gen.reference_samples(truth);
      bias::ReferenceSamples wind;
      bias::ReferenceSamples solar;
      for (const auto& [key, values] : reference)
        (key.second == convert::Technology::Wind ? wind : solar).emplace(key, values);
      bias::write_reference_samples(dir / "reference_wind.csv", wind);
      bias::write_reference_samples(dir / "reference_solar.csv", solar);
      demand::write_demand_file(dir / "demand_hist.csv", gen.historical_demand(view));
      std::string planted = "country,mean_load,heating_coeff,cooling_coeff\n";
      for (const auto& p : gen.planted())
        csv::append_row(planted, p.country, p.mean_load, p.heating_coeff, p.cooling_coeff);
      csv::write_file(dir / "planted_demand.csv", planted);
    }
    for (const auto* f : {&view.wind, &view.irradiance, &view.temperature}) {
      const auto var = std::string(weather::to_string(f->variable()));
      const auto rel = "fields/" + slug + "_" + var + ".csv";
      weather::write_field_series(dir / rel, *f);
      const char* key = f->variable() == Variable::WindSpeed    ? "wind"
                        : f->variable() == Variable::Irradiance ? "irradiance"
                                                                : "temperature";
      model_section += view.scenario + "." + key + " = " + rel + "\n";
    }
  }

  std::string alpha;
  for (int i = 0; i <= 10; ++i) {
    if (i) alpha += ",";
    csv::append(alpha, i / 10.0);
  }
  std::string ini;
  ini += "# Synthetic input bundle, seed " + std::to_string(spec.seed) + "\n";
  ini += "[run]\n";
  ini += "alpha_grid = " + alpha + "\n";
  ini += "gamma = 1\n";
  ini += "window_years = " + std::to_string(std::min(20, spec.years)) + "\n";
  ini += "window_mode = non_overlapping\n";
  ini += "seed = " + std::to_string(spec.seed) + "\n\n";
  ini += "[inputs]\n";
  ini += "grid = grid.csv\nweights = weights.csv\ndemand = demand_hist.csv\n";
  ini += "reference_wind = reference_wind.csv\nreference_solar = reference_solar.csv\n\n";
  ini += "[degree_days]\nheating_threshold = 17\ncooling_threshold = 22\n\n";
  ini += "[bias]\nbins = 100\nscale_min = 0.5\nscale_max = 2\nscale_step = 0.01\n\n";
  ini += model_section;
  const auto path = dir / "run.ini";
  csv::write_file(path, ini);
  return path;
}

}  // namespace vrekit::synth
