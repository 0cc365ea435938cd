#pragma once

// Generation-load mismatch for a homogeneous wind-solar layout.
//
// Country series are normalized by their own historical means, so each
// country's mismatch is in units of its mean historical load. The system
// ("copper plate") mismatch is the load-share weighted sum of the country
// mismatches.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vrekit/weather_store.hpp"

namespace vrekit::mismatch {

struct ScenarioDescriptor {
  std::string scenario;  // historical, RCP2.6, RCP4.5 or RCP8.5
  std::string model_id;
  int start_year = 0;
  int end_year = 0;
  double alpha = 1.0;  // wind share, 1 = wind only
  double gamma = 1.0;  // renewable penetration

  void validate() const;
};

bool is_known_scenario(std::string_view name);

struct CountrySeries {
  std::string country;
  std::vector<double> wind_cf;
  std::vector<double> solar_cf;
  std::vector<double> load;
};

struct SystemSeries {
  weather::TimeAxis time;
  std::vector<CountrySeries> countries;
};

struct CountryNormalization {
  std::string country;
  double mean_wind_cf = 0.0;
  double mean_solar_cf = 0.0;
  double mean_load = 0.0;
};

/// Frozen after the historical fit; never recomputed per scenario.
struct NormalizationConstants {
  std::vector<CountryNormalization> countries;

  /// w_n = mean load of n / sum of mean loads.
  [[nodiscard]] std::vector<double> load_shares() const;
};

/// Per-country means over the whole historical period. Throws ZeroMean.
NormalizationConstants compute_normalization(const SystemSeries& historical);

/// Divides each series by its country's historical mean. Countries must
/// appear in the same order as in `constants`.
SystemSeries normalize(const SystemSeries& raw, const NormalizationConstants& constants);

/// gamma * (alpha * W + (1 - alpha) * S) - L.
std::vector<double> mismatch(double alpha, double gamma, std::span<const double> wind, std::span<const double> solar,
                             std::span<const double> load);

/// Sum_n shares[n] * deltas[n](t). Throws WeightSumInvalid unless the shares
/// are non-negative and sum to 1.
std::vector<double> aggregate_mismatch(const std::vector<std::vector<double>>& deltas, std::span<const double> shares);

struct Decomposition {
  std::vector<double> balancing;    // max(-delta, 0)
  std::vector<double> curtailment;  // max(delta, 0)
};

Decomposition decompose(std::span<const double> delta);

struct MismatchSet {
  weather::TimeAxis time;
  std::vector<std::string> countries;
  std::vector<double> shares;
  std::vector<std::vector<double>> country_delta;
  std::vector<Decomposition> country_parts;
  std::vector<double> aggregate_delta;
  Decomposition aggregate_parts;
};

MismatchSet build_mismatch_set(const SystemSeries& normalized, std::span<const double> shares, double alpha,
                               double gamma);

/// Long format `time_index,country,delta,balancing,curtailment`; the system
/// aggregate uses country=EU.
void write_mismatch_csv(const std::filesystem::path& path, const MismatchSet& set);

}  // namespace vrekit::mismatch
