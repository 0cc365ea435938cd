#include "vrekit/mismatch.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "vrekit/csv.hpp"
#include "vrekit/error.hpp"

namespace vrekit::mismatch {

namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void require_length(const std::vector<double>& v, std::size_t n, const std::string& what) {
  if (v.size() != n) throw Error(ErrorKind::AxisMismatch, what + " has " + std::to_string(v.size()) +
                                                              " steps, expected " + std::to_string(n));
}

}  // namespace

bool is_known_scenario(std::string_view name) {
  static constexpr std::array<std::string_view, 4> known{"historical", "RCP2.6", "RCP4.5", "RCP8.5"};
  return std::find(known.begin(), known.end(), name) != known.end();
}

void ScenarioDescriptor::validate() const {
  if (!is_known_scenario(scenario)) throw Error(ErrorKind::InvalidArgument, "unknown scenario '" + scenario + "'");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must lie in [0,1]");
  if (!(gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
  if (end_year < start_year) throw Error(ErrorKind::InvalidArgument, "period ends before it starts");
}

std::vector<double> NormalizationConstants::load_shares() const {
  double total = 0.0;
  for (const auto& c : countries) total += c.mean_load;
  std::vector<double> shares;
  shares.reserve(countries.size());
  for (const auto& c : countries) shares.push_back(c.mean_load / total);
  return shares;
}

NormalizationConstants compute_normalization(const SystemSeries& historical) {
  NormalizationConstants k;
  for (const auto& c : historical.countries) {
    require_length(c.wind_cf, historical.time.n_steps, c.country + " wind");
    require_length(c.solar_cf, historical.time.n_steps, c.country + " solar");
    require_length(c.load, historical.time.n_steps, c.country + " load");
    CountryNormalization n{c.country, mean_of(c.wind_cf), mean_of(c.solar_cf), mean_of(c.load)};
    if (!(n.mean_wind_cf > 0.0)) throw Error(ErrorKind::ZeroMean, c.country + ": mean wind capacity factor is 0");
    if (!(n.mean_solar_cf > 0.0)) throw Error(ErrorKind::ZeroMean, c.country + ": mean solar capacity factor is 0");
    if (!(n.mean_load > 0.0)) throw Error(ErrorKind::ZeroMean, c.country + ": mean load is 0");
    k.countries.push_back(std::move(n));
  }
  if (k.countries.empty()) throw Error(ErrorKind::EmptyInput, "no countries to normalize");
  return k;
}

SystemSeries normalize(const SystemSeries& raw, const NormalizationConstants& constants) {
  if (raw.countries.size() != constants.countries.size())
    throw Error(ErrorKind::AxisMismatch, "country sets differ between scenario and normalization");
  SystemSeries out{raw.time, {}};
  out.countries.reserve(raw.countries.size());
  for (std::size_t i = 0; i < raw.countries.size(); ++i) {
    const auto& c = raw.countries[i];
    const auto& k = constants.countries[i];
    if (c.country != k.country)
      throw Error(ErrorKind::AxisMismatch, "country order differs: " + c.country + " vs " + k.country);
    require_length(c.wind_cf, raw.time.n_steps, c.country + " wind");
    require_length(c.solar_cf, raw.time.n_steps, c.country + " solar");
    require_length(c.load, raw.time.n_steps, c.country + " load");
    CountrySeries n{c.country, c.wind_cf, c.solar_cf, c.load};
    for (auto& v : n.wind_cf) v /= k.mean_wind_cf;
    for (auto& v : n.solar_cf) v /= k.mean_solar_cf;
    for (auto& v : n.load) v /= k.mean_load;
    out.countries.push_back(std::move(n));
  }
  return out;
}

std::vector<double> mismatch(double alpha, double gamma, std::span<const double> wind, std::span<const double> solar,
                             std::span<const double> load) {
  if (wind.size() != load.size() || solar.size() != load.size())
    throw Error(ErrorKind::AxisMismatch, "wind, solar and load series differ in length");
  std::vector<double> delta(load.size());
  for (std::size_t t = 0; t < delta.size(); ++t)
    delta[t] = gamma * (alpha * wind[t] + (1.0 - alpha) * solar[t]) - load[t];
  return delta;
}

std::vector<double> aggregate_mismatch(const std::vector<std::vector<double>>& deltas, std::span<const double> shares) {
  if (deltas.size() != shares.size())
    throw Error(ErrorKind::WeightSumInvalid, "one load share per country is required");
  double sum = 0.0;
  for (double w : shares) {
    if (!(w >= 0.0)) throw Error(ErrorKind::WeightSumInvalid, "load shares must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > weather::kWeightSumTolerance)
    throw Error(ErrorKind::WeightSumInvalid, "load shares sum to " + csv::format(sum));
  if (deltas.empty()) return {};
  std::vector<double> out(deltas.front().size(), 0.0);
  for (std::size_t n = 0; n < deltas.size(); ++n) {
    if (deltas[n].size() != out.size()) throw Error(ErrorKind::AxisMismatch, "country mismatch lengths differ");
    for (std::size_t t = 0; t < out.size(); ++t) out[t] += shares[n] * deltas[n][t];
  }
  return out;
}

Decomposition decompose(std::span<const double> delta) {
  Decomposition d{std::vector<double>(delta.size()), std::vector<double>(delta.size())};
  for (std::size_t t = 0; t < delta.size(); ++t) {
    const double x = delta[t];
    d.balancing[t] = x < 0.0 ? -x : 0.0;
    d.curtailment[t] = x > 0.0 ? x : 0.0;
  }
  return d;
}

MismatchSet build_mismatch_set(const SystemSeries& normalized, std::span<const double> shares, double alpha,
                               double gamma) {
  MismatchSet set;
  set.time = normalized.time;
  set.shares.assign(shares.begin(), shares.end());
  for (const auto& c : normalized.countries) {
    set.countries.push_back(c.country);
    set.country_delta.push_back(mismatch::mismatch(alpha, gamma, c.wind_cf, c.solar_cf, c.load));
    set.country_parts.push_back(decompose(set.country_delta.back()));
  }
  set.aggregate_delta = aggregate_mismatch(set.country_delta, shares);
  set.aggregate_parts = decompose(set.aggregate_delta);
  return set;
}

void write_mismatch_csv(const std::filesystem::path& path, const MismatchSet& set) {
  std::string out = "time_index,country,delta,balancing,curtailment\n";
  const std::size_t n = set.aggregate_delta.size();
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t c = 0; c < set.countries.size(); ++c)
      csv::append_row(out, t, set.countries[c], set.country_delta[c][t], set.country_parts[c].balancing[t],
                      set.country_parts[c].curtailment[t]);
    csv::append_row(out, t, "EU", set.aggregate_delta[t], set.aggregate_parts.balancing[t],
                    set.aggregate_parts.curtailment[t]);
  }
  csv::write_file(path, out);
}

}  // namespace vrekit::mismatch
