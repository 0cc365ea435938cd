#pragma once

// The four key metrics of a renewable-dominated system, evaluated per year on
// the balancing series, plus the statistics used to compare scenarios:
// windowed mean/sigma, paired t-tests and box summaries.
//
//   K1 dispatchable electricity   mean of aggregated balancing
//   K2 transmission benefit       mean isolated balancing - mean aggregated balancing
//   K3 dispatchable capacity      max of aggregated balancing
//   K4 short-term variability     sample std of 3-hourly balancing differences

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vrekit/mismatch.hpp"

namespace vrekit::metrics {

enum class Metric { K1, K2, K3, K4 };
inline constexpr std::array<Metric, 4> kAllMetrics{Metric::K1, Metric::K2, Metric::K3, Metric::K4};
std::string_view name(Metric m);

struct KeyMetrics {
  double dispatchable_electricity = 0.0;
  double transmission_benefit = 0.0;
  double dispatchable_capacity = 0.0;
  double short_term_variability = 0.0;

  [[nodiscard]] double get(Metric m) const;
  void set(Metric m, double value);
};

double dispatchable_electricity(std::span<const double> balancing);

/// sum_n shares[n] * mean(country_balancing[n]) - mean(aggregate_balancing).
double transmission_benefit(const std::vector<std::span<const double>>& country_balancing,
                            std::span<const double> shares, std::span<const double> aggregate_balancing);

double dispatchable_capacity(std::span<const double> balancing);

/// Linear-interpolated (inclusive) quantile of the balancing values.
double dispatchable_capacity_quantile(std::span<const double> balancing, double q);

/// Throws TooShort for fewer than 3 values.
double short_term_variability(std::span<const double> balancing);

struct MetricOptions {
  /// When set, K3 is this quantile of balancing instead of the maximum.
  std::optional<double> capacity_quantile;
};

/// Metrics over steps [begin, end) of a mismatch set.
KeyMetrics key_metrics(const mismatch::MismatchSet& set, std::size_t begin, std::size_t end,
                       const MetricOptions& options = {});

struct AnnualMetricSeries {
  mismatch::ScenarioDescriptor scenario;
  std::vector<int> years;
  std::vector<KeyMetrics> values;
};

AnnualMetricSeries annual_metrics(const mismatch::MismatchSet& set, const mismatch::ScenarioDescriptor& scenario,
                                  const MetricOptions& options = {});

enum class WindowMode { NonOverlapping, Rolling };

struct MeanSigma {
  double mean = 0.0;
  double sigma = 0.0;  // sample standard deviation; 0 for a single value
};

MeanSigma mean_sigma(std::span<const double> values);

/// Start offsets of the windows over `n_years`. Throws InsufficientYears.
std::vector<std::size_t> window_offsets(std::size_t n_years, int window_years, WindowMode mode);

struct WindowStats {
  int window_start = 0;
  int window_years = 20;
  KeyMetrics mean;
  KeyMetrics sigma;
};

std::vector<WindowStats> window_stats(const AnnualMetricSeries& series, int window_years = 20,
                                      WindowMode mode = WindowMode::NonOverlapping);

struct TTestResult {
  double t_statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  bool reject_at_95 = false;
};

/// Two-sided paired t-test on d = a - b. Constant nonzero differences give
/// an infinite t with p = 0; identical samples give t = 0, p = 1.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

struct BoxSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Quartiles by linear interpolation between order statistics (inclusive).
BoxSummary box_summary(std::span<const double> values);

}  // namespace vrekit::metrics
