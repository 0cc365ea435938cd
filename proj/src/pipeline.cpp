#include "vrekit/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include "vrekit/bias_adjust.hpp"
#include "vrekit/converters.hpp"
#include "vrekit/csv.hpp"
#include "vrekit/demand_model.hpp"
#include "vrekit/metrics.hpp"
#include "vrekit/mismatch.hpp"
#include "vrekit/weather_store.hpp"

namespace vrekit::pipeline {

namespace fs = std::filesystem;
using config::RunConfig;
using convert::Technology;
using metrics::Metric;
using weather::FieldSeries;
using weather::Variable;

std::string to_string(const Finding& f) {
  return std::string(vrekit::to_string(f.kind)) + " " + f.subject + ": " + f.message;
}

StageError::StageError(std::string stage, ErrorKind kind, const std::string& cause)
    : std::runtime_error("stage " + stage + " failed: " + std::string(vrekit::to_string(kind)) + ": " + cause),
      stage_(std::move(stage)),
      kind_(kind) {}

// ---------------------------------------------------------------- hashing

namespace {

struct DigestContext {
  DigestContext() : ctx(EVP_MD_CTX_new()) {
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) throw Error(ErrorKind::Io, "SHA-256 unavailable");
  }
  ~DigestContext() { EVP_MD_CTX_free(ctx); }
  DigestContext(const DigestContext&) = delete;
  DigestContext& operator=(const DigestContext&) = delete;

  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx, data, n); }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md.data(), &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[md[i] >> 4]);
      out.push_back(kHex[md[i] & 0xf]);
    }
    return out;
  }

  EVP_MD_CTX* ctx;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  DigestContext d;
  d.update(bytes.data(), bytes.size());
  return d.hex();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  DigestContext d;
  std::vector<char> buf(1 << 20);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return d.hex();
}

// ------------------------------------------------------------- validation

namespace {

class Collector {
 public:
  void add(ErrorKind kind, std::string subject, std::string message) {
    findings.push_back({kind, std::move(subject), std::move(message)});
  }

  template <class F>
  bool attempt(const std::string& subject, F&& f) {
    try {
      f();
      return true;
    } catch (const Error& e) {
      add(e.kind(), subject, e.detail());
    } catch (const std::exception& e) {
      add(ErrorKind::Io, subject, e.what());
    }
    return false;
  }

  bool require_file(const fs::path& p, std::string_view key) {
    if (p.empty()) {
      add(ErrorKind::InvalidArgument, std::string(key), "not set");
      return false;
    }
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) {
      add(ErrorKind::Io, p.string(), "file not found");
      return false;
    }
    return true;
  }

  std::vector<Finding> findings;
};

std::vector<std::pair<std::string_view, const fs::path*>> weight_paths(const RunConfig& cfg) {
  return {{"weights_wind", &cfg.weights_for(Variable::WindSpeed)},
          {"weights_solar", &cfg.weights_for(Variable::Irradiance)},
          {"weights_temperature", &cfg.weights_for(Variable::Temperature)}};
}

const std::array<Variable, 3> kVariables{Variable::WindSpeed, Variable::Irradiance, Variable::Temperature};

const fs::path& field_path(const config::ScenarioInputs& s, Variable v) {
  switch (v) {
    case Variable::WindSpeed: return s.wind;
    case Variable::Irradiance: return s.irradiance;
    case Variable::Temperature: break;
  }
  return s.temperature;
}

}  // namespace

std::vector<Finding> validate(const RunConfig& cfg) {
  Collector out;
  out.attempt("config", [&] { cfg.check_values(); });

  std::optional<weather::GridDefinition> grid;
  if (out.require_file(cfg.grid, "inputs.grid"))
    out.attempt(cfg.grid.string(), [&] { grid = weather::load_grid_definition(cfg.grid); });

  // Countries come from the wind weights; the other tables must cover them.
  std::vector<std::string> countries;
  std::map<fs::path, std::set<std::string>> table_countries;
  for (const auto& [key, path] : weight_paths(cfg)) {
    if (table_countries.count(*path)) continue;
    if (!out.require_file(*path, std::string("inputs.") + std::string(key))) continue;
    out.attempt(path->string(), [&] {
      const auto table = weather::parse_country_weights(*path);
      auto& seen = table_countries[*path];
      for (const auto& cw : table) seen.insert(cw.country);
      if (grid)
        for (auto& issue : weather::weight_issues(table, *grid))
          out.add(issue.kind, issue.country, path->filename().string() + ": " + issue.message);
    });
  }
  if (auto it = table_countries.find(cfg.weights_for(Variable::WindSpeed)); it != table_countries.end())
    countries.assign(it->second.begin(), it->second.end());
  for (const auto& [path, seen] : table_countries)
    for (const auto& c : countries)
      if (!seen.count(c)) out.add(ErrorKind::MalformedFile, c, "no weights in " + path.string());

  std::optional<weather::TimeAxis> historical_axis;
  if (grid) {
    for (const auto& model : cfg.models) {
      for (const auto& sc : model.scenarios) {
        const std::string subject = model.id + "/" + sc.scenario;
        std::optional<weather::TimeAxis> axis;
        for (auto v : kVariables) {
          const auto& p = field_path(sc, v);
          if (!out.require_file(p, subject + "." + std::string(weather::to_string(v)))) continue;
          out.attempt(p.string(), [&] {
            const auto field = weather::load_field_series(p, *grid, v);
            if (axis && !(*axis == field.time()))
              out.add(ErrorKind::AxisMismatch, subject, p.filename().string() + " has a different time axis");
            if (!axis) axis = field.time();
          });
        }
        if (!axis) continue;
        if (!out.attempt(subject, [&] { weather::require_whole_years(*axis); })) continue;
        if (axis->n_years() < cfg.window_years)
          out.add(ErrorKind::InsufficientYears, subject,
                  std::to_string(axis->n_years()) + " years, window needs " + std::to_string(cfg.window_years));
        if (sc.scenario == "historical") {
          if (historical_axis && historical_axis->n_steps != axis->n_steps)
            out.add(ErrorKind::AxisMismatch, subject, "historical periods differ between models");
          if (!historical_axis) historical_axis = axis;
        }
      }
    }
  }

  if (out.require_file(cfg.demand, "inputs.demand")) {
    out.attempt(cfg.demand.string(), [&] {
      const auto demand = demand::load_demand_file(cfg.demand);
      for (const auto& c : countries) {
        auto it = demand.find(c);
        if (it == demand.end()) {
          out.add(ErrorKind::MissingValue, c, "no demand series");
        } else if (historical_axis && it->second.size() != historical_axis->n_steps) {
          out.add(ErrorKind::AxisMismatch, c,
                  "demand has " + std::to_string(it->second.size()) + " steps, historical fields have " +
                      std::to_string(historical_axis->n_steps));
        }
      }
    });
  }

  for (auto [path, tech, key] : {std::tuple{&cfg.reference_wind, Technology::Wind, "inputs.reference_wind"},
                                 std::tuple{&cfg.reference_solar, Technology::Solar, "inputs.reference_solar"}}) {
    if (!out.require_file(*path, key)) continue;
    out.attempt(path->string(), [&, tech = tech] {
      bias::ReferenceSamples samples;
      bias::load_reference_samples(*path, samples);
      for (const auto& c : countries)
        if (samples.find({c, tech}) == samples.end())
          out.add(ErrorKind::MissingValue, c, std::string("no ") + std::string(convert::to_string(tech)) +
                                                  " reference samples");
    });
  }
  return std::move(out.findings);
}

std::vector<Finding> validate(const fs::path& config_path) {
  Collector out;
  std::optional<RunConfig> cfg;
  if (!out.require_file(config_path, "config")) return std::move(out.findings);
  out.attempt(config_path.string(), [&] { cfg = config::load_run_config(config_path); });
  if (!cfg) return std::move(out.findings);
  return validate(*cfg);
}

// ------------------------------------------------------------------- run

namespace {

/// Runs a callable under a stage name: records wall time and turns any
/// failure into a StageError carrying the stage.
class StageRunner {
 public:
  template <class F>
  auto operator()(std::string_view stage, F&& f) -> decltype(f()) {
    Timer timer(*this, stage);
    try {
      return f();
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(std::string(stage), e.kind(), e.detail());
    } catch (const std::exception& e) {
      throw StageError(std::string(stage), ErrorKind::Io, e.what());
    }
  }

  std::vector<std::pair<std::string, double>> timings;

 private:
  struct Timer {
    Timer(StageRunner& r, std::string_view s) : runner(r), stage(s), start(std::chrono::steady_clock::now()) {}
    ~Timer() {
      const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      auto it = std::find_if(runner.timings.begin(), runner.timings.end(),
                             [&](const auto& p) { return p.first == stage; });
      if (it == runner.timings.end()) runner.timings.emplace_back(std::string(stage), dt);
      else it->second += dt;
    }
    StageRunner& runner;
    std::string_view stage;
    std::chrono::steady_clock::time_point start;
  };
};

struct CommonInputs {
  weather::GridDefinition grid;
  weather::WeightTable wind_weights;
  weather::WeightTable solar_weights;
  weather::WeightTable temperature_weights;
  std::map<std::string, std::vector<double>> demand;
  std::vector<std::string> countries;
};

struct ScenarioData {
  std::string name;
  FieldSeries wind;
  FieldSeries irradiance;
  FieldSeries temperature;
};

struct ModelFit {
  std::vector<bias::BiasTransform> wind;  // per country, in country order
  std::vector<bias::BiasTransform> solar;
  std::vector<demand::DemandRegression> demand;
  mismatch::NormalizationConstants normalization;
  std::vector<double> shares;
};

struct ScenarioResult {
  std::string scenario;
  weather::TimeAxis time;
  std::vector<metrics::AnnualMetricSeries> per_alpha;  // alpha grid order
  std::vector<std::array<double, 3>> annual_wsl;       // share-weighted normalized W, S, L per year
};

struct ModelResult {
  std::string id;
  std::vector<ScenarioResult> scenarios;  // historical first
};

CommonInputs ingest_common(const RunConfig& cfg) {
  CommonInputs in;
  in.grid = weather::load_grid_definition(cfg.grid);
  std::map<fs::path, weather::WeightTable> cache;
  auto weights = [&](Variable v) -> const weather::WeightTable& {
    const auto& p = cfg.weights_for(v);
    auto it = cache.find(p);
    if (it == cache.end()) it = cache.emplace(p, weather::load_country_weights(p, in.grid)).first;
    return it->second;
  };
  in.wind_weights = weights(Variable::WindSpeed);
  in.solar_weights = weights(Variable::Irradiance);
  in.temperature_weights = weights(Variable::Temperature);
  for (const auto& cw : in.wind_weights) in.countries.push_back(cw.country);
  if (in.countries.empty()) throw Error(ErrorKind::EmptyInput, "no countries in the weights");
  for (const auto& c : in.countries) {
    (void)weather::find_country(in.solar_weights, c);
    (void)weather::find_country(in.temperature_weights, c);
  }
  in.demand = demand::load_demand_file(cfg.demand);
  for (const auto& c : in.countries)
    if (!in.demand.count(c)) throw Error(ErrorKind::MissingValue, "no demand series for " + c);
  return in;
}

ScenarioData load_scenario(const config::ScenarioInputs& s, const weather::GridDefinition& grid) {
  ScenarioData d{s.scenario, weather::load_field_series(s.wind, grid, Variable::WindSpeed),
                 weather::load_field_series(s.irradiance, grid, Variable::Irradiance),
                 weather::load_field_series(s.temperature, grid, Variable::Temperature)};
  if (!(d.wind.time() == d.irradiance.time()) || !(d.wind.time() == d.temperature.time()))
    throw Error(ErrorKind::AxisMismatch, s.scenario + ": wind, irradiance and temperature time axes differ");
  weather::require_whole_years(d.wind.time());
  return d;
}

demand::DegreeDaySeries country_degree_days(const ScenarioData& d, const weather::CountryWeights& cw,
                                            const demand::DegreeDayParams& params) {
  const auto t = weather::aggregate_to_country(d.temperature, cw);
  return demand::degree_day_series(demand::daily_mean_temperature(t), params);
}

mismatch::SystemSeries raw_system(const ScenarioData& d, const ModelFit& fit, const CommonInputs& in,
                                  const RunConfig& cfg, StageRunner& stage) {
  mismatch::SystemSeries sys{d.wind.time(), {}};
  sys.countries.resize(in.countries.size());
  stage("bias-adjust", [&] {
    for (std::size_t n = 0; n < in.countries.size(); ++n) {
      const auto& c = in.countries[n];
      auto& cs = sys.countries[n];
      cs.country = c;
      cs.wind_cf = convert::convert_wind_cf(d.wind, weather::find_country(in.wind_weights, c), cfg.turbine,
                                            fit.wind[n].scale)
                       .values;
      cs.solar_cf = convert::convert_solar_cf(d.irradiance, d.temperature, weather::find_country(in.solar_weights, c),
                                              cfg.panel, fit.solar[n].scale)
                        .values;
    }
  });
  stage("demand-model", [&] {
    for (std::size_t n = 0; n < in.countries.size(); ++n) {
      const auto dd = country_degree_days(d, weather::find_country(in.temperature_weights, in.countries[n]),
                                          cfg.degree_days);
      sys.countries[n].load = demand::synthesize_demand(fit.demand[n], dd, d.wind.time()).values;
    }
  });
  return sys;
}

ModelFit fit_model(const ScenarioData& hist, const CommonInputs& in, const bias::ReferenceSamples& refs,
                   const RunConfig& cfg, StageRunner& stage) {
  ModelFit fit;
  stage("bias-adjust", [&] {
    for (const auto& c : in.countries) {
      auto reference = [&](Technology tech) {
        auto it = refs.find({c, tech});
        if (it == refs.end())
          throw Error(ErrorKind::MissingValue,
                      "no " + std::string(convert::to_string(tech)) + " reference samples for " + c);
        return bias::histogram(it->second, cfg.histogram_bins);
      };
      const auto& ww = weather::find_country(in.wind_weights, c);
      const auto& sw = weather::find_country(in.solar_weights, c);
      fit.wind.push_back(bias::fit_bias_transform(
          Technology::Wind, reference(Technology::Wind),
          [&](double s) { return convert::convert_wind_cf(hist.wind, ww, cfg.turbine, s).values; }, cfg.scale_grid));
      fit.solar.push_back(bias::fit_bias_transform(
          Technology::Solar, reference(Technology::Solar),
          [&](double s) { return convert::convert_solar_cf(hist.irradiance, hist.temperature, sw, cfg.panel, s).values; },
          cfg.scale_grid));
    }
  });
  stage("demand-model", [&] {
    for (const auto& c : in.countries) {
      const auto& observed = in.demand.at(c);
      if (observed.size() != hist.wind.n_steps())
        throw Error(ErrorKind::AxisMismatch, c + ": demand has " + std::to_string(observed.size()) +
                                                 " steps, historical fields have " +
                                                 std::to_string(hist.wind.n_steps()));
      const auto dd = country_degree_days(hist, weather::find_country(in.temperature_weights, c), cfg.degree_days);
      auto reg = demand::fit_demand_regression({c, hist.wind.time(), observed}, dd);
      fit.demand.push_back(std::move(reg));
    }
  });
  return fit;
}

std::vector<std::array<double, 3>> annual_wsl(const mismatch::SystemSeries& normalized,
                                              const std::vector<double>& shares) {
  const auto per_year = static_cast<std::size_t>(normalized.time.steps_per_year);
  std::vector<std::array<double, 3>> out(static_cast<std::size_t>(normalized.time.n_years()), {0.0, 0.0, 0.0});
  for (std::size_t n = 0; n < normalized.countries.size(); ++n) {
    const auto& c = normalized.countries[n];
    for (std::size_t y = 0; y < out.size(); ++y) {
      std::array<double, 3> sum{0.0, 0.0, 0.0};
      for (std::size_t t = y * per_year; t < (y + 1) * per_year; ++t) {
        sum[0] += c.wind_cf[t];
        sum[1] += c.solar_cf[t];
        sum[2] += c.load[t];
      }
      for (int k = 0; k < 3; ++k) out[y][k] += shares[n] * sum[k] / static_cast<double>(per_year);
    }
  }
  return out;
}

std::string scenario_file_stem(std::string_view scenario) {
  std::string s;
  for (char ch : scenario)
    if (ch != '.') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  return s;
}

ModelResult run_model(const config::ModelInputs& model, const CommonInputs& in, const bias::ReferenceSamples& refs,
                      const RunConfig& cfg, const fs::path& staging, StageRunner& stage) {
  ModelResult result{model.id, {}};
  std::vector<const config::ScenarioInputs*> order;
  for (const auto& s : model.scenarios)
    if (s.scenario == "historical") order.push_back(&s);
  for (const auto& s : model.scenarios)
    if (s.scenario != "historical") order.push_back(&s);

  std::optional<ModelFit> fit;
  const metrics::MetricOptions options{cfg.capacity_quantile};
  for (const auto* inputs : order) {
    auto data = stage("ingest", [&] { return std::make_unique<ScenarioData>(load_scenario(*inputs, in.grid)); });
    if (!fit) {
      fit = fit_model(*data, in, refs, cfg, stage);
      const auto model_dir = staging / "models" / model.id;
      stage("reports", [&] {
        std::vector<bias::TransformRecord> records;
        for (std::size_t n = 0; n < in.countries.size(); ++n) {
          records.push_back({in.countries[n], fit->wind[n]});
          records.push_back({in.countries[n], fit->solar[n]});
        }
        bias::write_transforms(model_dir / "bias_transforms.csv", records);
        demand::write_regressions(model_dir / "demand_regression.csv", model_dir / "demand_baseline.csv", fit->demand);
      });
    }
    const auto raw = raw_system(*data, *fit, in, cfg, stage);
    data.reset();
    if (fit->shares.empty()) {
      stage("mismatch", [&] {
        fit->normalization = mismatch::compute_normalization(raw);
        fit->shares = fit->normalization.load_shares();
      });
    }

    ScenarioResult sr{inputs->scenario, raw.time, {}, {}};
    const auto normalized = stage("mismatch", [&] { return mismatch::normalize(raw, fit->normalization); });
    sr.annual_wsl = annual_wsl(normalized, fit->shares);
    for (double alpha : cfg.alpha_grid) {
      const auto set = stage("mismatch", [&] {
        return mismatch::build_mismatch_set(normalized, fit->shares, alpha, cfg.gamma);
      });
      const mismatch::ScenarioDescriptor desc{inputs->scenario, model.id, raw.time.start_year, raw.time.end_year(),
                                              alpha, cfg.gamma};
      sr.per_alpha.push_back(stage("metrics", [&] {
        desc.validate();
        return metrics::annual_metrics(set, desc, options);
      }));
      if (cfg.export_mismatch_alpha && std::abs(*cfg.export_mismatch_alpha - alpha) < 1e-12) {
        stage("reports", [&] {
          mismatch::write_mismatch_csv(
              staging / "models" / model.id / ("mismatch_" + scenario_file_stem(inputs->scenario) + ".csv"), set);
        });
      }
    }
    result.scenarios.push_back(std::move(sr));
  }
  return result;
}

// ---------------------------------------------------------------- reports

std::vector<double> metric_values(const metrics::AnnualMetricSeries& s, Metric m, std::size_t begin,
                                  std::size_t count) {
  std::vector<double> v;
  for (std::size_t i = begin; i < begin + count; ++i) v.push_back(s.values[i].get(m));
  return v;
}

struct Reports {
  std::string annual = "model,scenario,alpha,year,K1,K2,K3,K4\n";
  std::string windows =
      "model,scenario,alpha,window_start,window_years,mean_K1,mean_K2,mean_K3,mean_K4,sigma_K1,sigma_K2,sigma_K3,"
      "sigma_K4\n";
  std::string boxes = "model,scenario,alpha,window_start,metric,min,q1,median,q3,max\n";
  std::string ttests = "model,alpha,metric,scenario_a,start_a,scenario_b,start_b,t,df,p,reject\n";
  std::string spread = "model,alpha,metric,n_scenarios,spread_of_means,min_sigma,max_sigma,spread_below_sigma\n";
  std::string normalized =
      "model,scenario,window_start,window_years,mean_W,sigma_W,mean_S,sigma_S,mean_L,sigma_L\n";
};

void append_ttest(std::string& out, const std::string& model, const std::string& alpha, std::string_view quantity,
                  const std::string& scenario_a, int start_a, const std::string& scenario_b, int start_b,
                  std::span<const double> a, std::span<const double> b) {
  const auto r = metrics::paired_t_test(a, b);
  csv::append_row(out, model, alpha, quantity, scenario_a, start_a, scenario_b, start_b, r.t_statistic,
                  r.degrees_of_freedom, r.p_value, r.reject_at_95 ? 1 : 0);
}

void add_model_reports(Reports& rep, const ModelResult& model, const RunConfig& cfg) {
  const int wy = cfg.window_years;
  const auto& hist = model.scenarios.front();
  const auto hist_offsets = metrics::window_offsets(hist.annual_wsl.size(), wy, cfg.window_mode);
  const std::size_t hist_first = hist_offsets.front();

  for (const auto& sr : model.scenarios) {
    const auto offsets = metrics::window_offsets(sr.annual_wsl.size(), wy, cfg.window_mode);
    for (auto off : offsets) {
      std::array<std::vector<double>, 3> q;
      for (std::size_t y = off; y < off + static_cast<std::size_t>(wy); ++y)
        for (int k = 0; k < 3; ++k) q[k].push_back(sr.annual_wsl[y][k]);
      const auto w = metrics::mean_sigma(q[0]);
      const auto s = metrics::mean_sigma(q[1]);
      const auto l = metrics::mean_sigma(q[2]);
      csv::append_row(rep.normalized, model.id, sr.scenario, sr.time.start_year + static_cast<int>(off), wy, w.mean,
                      w.sigma, s.mean, s.sigma, l.mean, l.sigma);
    }
    for (std::size_t a = 0; a < cfg.alpha_grid.size(); ++a) {
      const auto& series = sr.per_alpha[a];
      std::string alpha;
      csv::append(alpha, cfg.alpha_grid[a]);
      for (std::size_t y = 0; y < series.years.size(); ++y) {
        const auto& k = series.values[y];
        csv::append_row(rep.annual, model.id, sr.scenario, alpha, series.years[y], k.dispatchable_electricity,
                        k.transmission_benefit, k.dispatchable_capacity, k.short_term_variability);
      }
      for (const auto& ws : metrics::window_stats(series, wy, cfg.window_mode)) {
        std::string row;
        csv::append_row(row, model.id, sr.scenario, alpha, ws.window_start, ws.window_years);
        row.pop_back();
        for (auto m : metrics::kAllMetrics) {
          row.push_back(',');
          csv::append(row, ws.mean.get(m));
        }
        for (auto m : metrics::kAllMetrics) {
          row.push_back(',');
          csv::append(row, ws.sigma.get(m));
        }
        rep.windows += row + "\n";
        const auto off = static_cast<std::size_t>(ws.window_start - series.years.front());
        for (auto m : metrics::kAllMetrics) {
          const auto b = metrics::box_summary(metric_values(series, m, off, static_cast<std::size_t>(wy)));
          csv::append_row(rep.boxes, model.id, sr.scenario, alpha, ws.window_start, metrics::name(m), b.min, b.q1,
                          b.median, b.q3, b.max);
        }
      }
    }
  }

  // Each future scenario's last window against the first historical window,
  // paired by position within the window.
  for (std::size_t i = 1; i < model.scenarios.size(); ++i) {
    const auto& sr = model.scenarios[i];
    const auto last = metrics::window_offsets(sr.annual_wsl.size(), wy, cfg.window_mode).back();
    const int start_a = sr.time.start_year + static_cast<int>(last);
    const int start_b = hist.time.start_year + static_cast<int>(hist_first);
    static constexpr std::array<std::string_view, 3> kQuantities{"W", "S", "L"};
    for (int k = 0; k < 3; ++k) {
      std::vector<double> a;
      std::vector<double> b;
      for (int y = 0; y < wy; ++y) {
        a.push_back(sr.annual_wsl[last + static_cast<std::size_t>(y)][k]);
        b.push_back(hist.annual_wsl[hist_first + static_cast<std::size_t>(y)][k]);
      }
      append_ttest(rep.ttests, model.id, "", kQuantities[static_cast<std::size_t>(k)], sr.scenario, start_a,
                   hist.scenario, start_b, a, b);
    }
    for (std::size_t a = 0; a < cfg.alpha_grid.size(); ++a) {
      std::string alpha;
      csv::append(alpha, cfg.alpha_grid[a]);
      for (auto m : metrics::kAllMetrics) {
        const auto va = metric_values(sr.per_alpha[a], m, last, static_cast<std::size_t>(wy));
        const auto vb = metric_values(hist.per_alpha[a], m, hist_first, static_cast<std::size_t>(wy));
        append_ttest(rep.ttests, model.id, alpha, metrics::name(m), sr.scenario, start_a, hist.scenario, start_b, va,
                     vb);
      }
    }
  }

  // Spread of the scenarios' last-window means against interannual variability.
  for (std::size_t a = 0; a < cfg.alpha_grid.size(); ++a) {
    std::string alpha;
    csv::append(alpha, cfg.alpha_grid[a]);
    for (auto m : metrics::kAllMetrics) {
      double lo = INFINITY;
      double hi = -INFINITY;
      double min_sigma = INFINITY;
      double max_sigma = -INFINITY;
      for (const auto& sr : model.scenarios) {
        const auto ws = metrics::window_stats(sr.per_alpha[a], wy, cfg.window_mode).back();
        lo = std::min(lo, ws.mean.get(m));
        hi = std::max(hi, ws.mean.get(m));
        min_sigma = std::min(min_sigma, ws.sigma.get(m));
        max_sigma = std::max(max_sigma, ws.sigma.get(m));
      }
      const double spread = hi - lo;
      csv::append_row(rep.spread, model.id, alpha, metrics::name(m), model.scenarios.size(), spread, min_sigma,
                      max_sigma, spread < min_sigma ? 1 : 0);
    }
  }
}

void publish(const fs::path& staging, const fs::path& out_dir) {
  for (const auto& entry : fs::directory_iterator(staging)) {
    const auto target = out_dir / entry.path().filename();
    fs::remove_all(target);
    fs::rename(entry.path(), target);
  }
  fs::remove_all(staging);
  fs::remove_all(out_dir / "quarantine");
}

void quarantine(const fs::path& staging, const fs::path& out_dir, const StageError& e) {
  std::error_code ec;
  const auto q = out_dir / "quarantine";
  fs::remove_all(q, ec);
  fs::create_directories(staging, ec);
  fs::rename(staging, q, ec);
  std::ofstream(q / "error.txt") << "stage: " << e.stage() << "\nkind: " << vrekit::to_string(e.kind())
                                 << "\nmessage: " << e.what() << "\n";
}

std::vector<fs::path> input_files(const RunConfig& cfg) {
  std::vector<fs::path> files{cfg.grid};
  for (const auto& [key, p] : weight_paths(cfg)) files.push_back(*p);
  files.push_back(cfg.demand);
  files.push_back(cfg.reference_wind);
  files.push_back(cfg.reference_solar);
  for (const auto& m : cfg.models)
    for (const auto& s : m.scenarios)
      for (auto v : kVariables) files.push_back(field_path(s, v));
  std::vector<fs::path> unique;
  for (auto& f : files)
    if (std::find(unique.begin(), unique.end(), f) == unique.end()) unique.push_back(f);
  return unique;
}

void list_files(const fs::path& root, std::vector<fs::path>& out) {
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file()) out.push_back(fs::relative(entry.path(), root));
  std::sort(out.begin(), out.end());
}

}  // namespace

RunResult run(const RunConfig& cfg, const fs::path& out_dir, std::string_view config_text) {
  if (out_dir.empty()) throw StageError("config", ErrorKind::InvalidArgument, "no output directory given");
  try {
    cfg.check_values();
  } catch (const Error& e) {
    throw StageError("config", e.kind(), e.detail());
  }
  const auto out = fs::absolute(out_dir);
  const auto staging = out / ".staging";
  try {
    fs::create_directories(out);
    fs::remove_all(staging);
    fs::create_directories(staging);
  } catch (const std::exception& e) {
    throw StageError("reports", ErrorKind::Io, e.what());
  }

  StageRunner stage;
  const auto wall_start = std::chrono::steady_clock::now();
  RunResult result{out, {}};
  try {
    const auto inputs = stage("ingest", [&] { return ingest_common(cfg); });
    const auto refs = stage("bias-adjust", [&] {
      bias::ReferenceSamples r;
      bias::load_reference_samples(cfg.reference_wind, r);
      bias::load_reference_samples(cfg.reference_solar, r);
      return r;
    });
    std::vector<ModelResult> models;
    for (const auto& m : cfg.models) models.push_back(run_model(m, inputs, refs, cfg, staging, stage));

    Reports rep;
    stage("metrics", [&] {
      for (const auto& m : models) add_model_reports(rep, m, cfg);
    });
    stage("reports", [&] {
      csv::write_file(staging / "metrics_annual.csv", rep.annual);
      csv::write_file(staging / "metrics_windows.csv", rep.windows);
      csv::write_file(staging / "box_summaries.csv", rep.boxes);
      csv::write_file(staging / "ttests.csv", rep.ttests);
      csv::write_file(staging / "scenario_spread.csv", rep.spread);
      csv::write_file(staging / "normalized_means.csv", rep.normalized);

      list_files(staging, result.reports);
      nlohmann::ordered_json manifest;
      manifest["tool"] = "vrekit";
      manifest["version"] = kVersion;
      const std::string resolved = cfg.to_ini();
      const std::string_view given = config_text.empty() ? std::string_view(resolved) : config_text;
      manifest["config_sha256"] = sha256_hex(given);
      manifest["config_text"] = std::string(given);
      manifest["resolved_config"] = resolved;
      manifest["resolved_config_sha256"] = sha256_hex(resolved);
      auto& ins = manifest["inputs"] = nlohmann::ordered_json::array();
      for (const auto& p : input_files(cfg)) ins.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
      auto& outs = manifest["outputs"] = nlohmann::ordered_json::array();
      for (const auto& p : result.reports)
        outs.push_back({{"path", p.generic_string()}, {"sha256", sha256_file(staging / p)}});
      auto& times = manifest["timings_seconds"] = nlohmann::ordered_json::object();
      for (const auto& [name, seconds] : stage.timings) times[name] = seconds;
      times["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
      csv::write_file(staging / "manifest.json", manifest.dump(2) + "\n");
      result.reports.push_back("manifest.json");
      publish(staging, out);
    });
  } catch (const StageError& e) {
    quarantine(staging, out, e);
    throw;
  }
  return result;
}

RunResult run(const fs::path& config_path, const fs::path& out_dir) {
  RunConfig cfg;
  std::string text;
  try {
    cfg = config::load_run_config(config_path);
    text = config_path.extension() == ".json" ? cfg.to_ini() : csv::read_file(config_path);
  } catch (const Error& e) {
    throw StageError("config", e.kind(), e.detail());
  }
  const auto out = out_dir.empty() ? cfg.output_directory : out_dir;
  return run(cfg, out, text);
}

// ---------------------------------------------------------------- compare

namespace {

struct RunTables {
  fs::path dir;
  std::vector<std::string> models;
  std::vector<std::string> scenarios;
  std::vector<std::string> alphas;
  // (model, scenario, alpha) -> year -> K1..K4
  std::map<std::tuple<std::string, std::string, std::string>, std::map<int, std::array<double, 4>>> annual;
  // (model, scenario, alpha) -> last window (start, years, means, sigmas)
  struct Window {
    int start = 0;
    int years = 0;
    std::array<double, 4> mean{};
    std::array<double, 4> sigma{};
  };
  std::map<std::tuple<std::string, std::string, std::string>, Window> last_window;
};

void push_unique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

double cell_double(const std::string& s, const fs::path& p) {
  double v = 0.0;
  if (!csv::parse(s, v)) throw Error(ErrorKind::MalformedFile, p.string() + ": bad number '" + s + "'");
  return v;
}

int cell_int(const std::string& s, const fs::path& p) {
  int v = 0;
  if (!csv::parse(s, v)) throw Error(ErrorKind::MalformedFile, p.string() + ": bad integer '" + s + "'");
  return v;
}

RunTables read_run(const fs::path& dir) {
  RunTables r{dir, {}, {}, {}, {}, {}};
  const auto annual_path = dir / "metrics_annual.csv";
  const auto annual = csv::read_table(annual_path);
  const std::array<std::size_t, 4> kcol{annual.column("K1"), annual.column("K2"), annual.column("K3"),
                                        annual.column("K4")};
  const auto cm = annual.column("model");
  const auto cs = annual.column("scenario");
  const auto ca = annual.column("alpha");
  const auto cy = annual.column("year");
  for (const auto& row : annual.rows) {
    push_unique(r.models, row[cm]);
    push_unique(r.scenarios, row[cs]);
    push_unique(r.alphas, row[ca]);
    auto& rec = r.annual[{row[cm], row[cs], row[ca]}][cell_int(row[cy], annual_path)];
    for (std::size_t k = 0; k < 4; ++k) rec[k] = cell_double(row[kcol[k]], annual_path);
  }
  if (r.annual.empty()) throw Error(ErrorKind::EmptyInput, annual_path.string() + ": no rows");

  const auto windows_path = dir / "metrics_windows.csv";
  const auto windows = csv::read_table(windows_path);
  const auto wm = windows.column("model");
  const auto wsc = windows.column("scenario");
  const auto wa = windows.column("alpha");
  const auto wstart = windows.column("window_start");
  const auto wyears = windows.column("window_years");
  for (const auto& row : windows.rows) {
    RunTables::Window w;
    w.start = cell_int(row[wstart], windows_path);
    w.years = cell_int(row[wyears], windows_path);
    for (std::size_t k = 0; k < 4; ++k) {
      w.mean[k] = cell_double(row[windows.column("mean_K" + std::to_string(k + 1))], windows_path);
      w.sigma[k] = cell_double(row[windows.column("sigma_K" + std::to_string(k + 1))], windows_path);
    }
    auto key = std::tuple{row[wm], row[wsc], row[wa]};
    auto it = r.last_window.find(key);
    if (it == r.last_window.end() || it->second.start < w.start) r.last_window[key] = w;
  }
  return r;
}

std::vector<double> parsed_alphas(const RunTables& r) {
  std::vector<double> v;
  for (const auto& a : r.alphas) v.push_back(cell_double(a, r.dir));
  return v;
}

}  // namespace

void compare(const std::vector<fs::path>& run_dirs, const fs::path& out_csv) {
  if (run_dirs.size() < 2) throw Error(ErrorKind::InvalidArgument, "compare needs at least two run directories");
  std::vector<RunTables> runs;
  for (const auto& d : run_dirs) runs.push_back(read_run(d));

  const auto& first = runs.front();
  const auto alphas = parsed_alphas(first);
  for (const auto& r : runs) {
    if (parsed_alphas(r) != alphas)
      throw Error(ErrorKind::GridMismatch, r.dir.string() + ": alpha grid differs from " + first.dir.string());
    if (r.scenarios != first.scenarios)
      throw Error(ErrorKind::GridMismatch, r.dir.string() + ": scenario set differs from " + first.dir.string());
  }

  struct Entry {
    std::string label;
    const RunTables* run;
    std::string model;
  };
  std::vector<Entry> entries;
  std::map<std::string, int> seen;
  for (const auto& r : runs) {
    for (const auto& m : r.models) {
      const int k = ++seen[m];
      entries.push_back({k == 1 ? m : m + "#" + std::to_string(k), &r, m});
    }
  }

  std::string out =
      "metric,scenario,alpha,model,window_start,window_years,min,q1,median,q3,max,window_mean,window_sigma,n_models,"
      "cross_model_spread\n";
  for (std::size_t k = 0; k < 4; ++k) {
    const auto metric = metrics::name(metrics::kAllMetrics[k]);
    for (const auto& scenario : first.scenarios) {
      for (std::size_t a = 0; a < first.alphas.size(); ++a) {
        std::vector<const RunTables::Window*> windows;
        std::vector<std::vector<double>> values;
        for (const auto& e : entries) {
          const auto key = std::tuple{e.model, scenario, e.run->alphas[a]};
          auto wit = e.run->last_window.find(key);
          auto ait = e.run->annual.find(key);
          if (wit == e.run->last_window.end() || ait == e.run->annual.end())
            throw Error(ErrorKind::GridMismatch,
                        e.run->dir.string() + ": no results for " + e.model + "/" + scenario + "/" + e.run->alphas[a]);
          windows.push_back(&wit->second);
          std::vector<double> v;
          for (const auto& [year, ks] : ait->second)
            if (year >= wit->second.start && year < wit->second.start + wit->second.years) v.push_back(ks[k]);
          values.push_back(std::move(v));
        }
        double lo = INFINITY;
        double hi = -INFINITY;
        for (const auto* w : windows) {
          lo = std::min(lo, w->mean[k]);
          hi = std::max(hi, w->mean[k]);
        }
        for (std::size_t i = 0; i < entries.size(); ++i) {
          const auto b = metrics::box_summary(values[i]);
          csv::append_row(out, metric, scenario, first.alphas[a], entries[i].label, windows[i]->start,
                          windows[i]->years, b.min, b.q1, b.median, b.q3, b.max, windows[i]->mean[k],
                          windows[i]->sigma[k], entries.size(), hi - lo);
        }
      }
    }
  }
  csv::write_file(out_csv, out);
}

}  // namespace vrekit::pipeline
