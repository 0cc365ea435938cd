#include "vrekit/metrics.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "vrekit/error.hpp"

namespace vrekit::metrics {

std::string_view name(Metric m) {
  switch (m) {
    case Metric::K1: return "K1";
    case Metric::K2: return "K2";
    case Metric::K3: return "K3";
    case Metric::K4: return "K4";
  }
  return "?";
}

double KeyMetrics::get(Metric m) const {
  switch (m) {
    case Metric::K1: return dispatchable_electricity;
    case Metric::K2: return transmission_benefit;
    case Metric::K3: return dispatchable_capacity;
    case Metric::K4: return short_term_variability;
  }
  return 0.0;
}

void KeyMetrics::set(Metric m, double value) {
  switch (m) {
    case Metric::K1: dispatchable_electricity = value; break;
    case Metric::K2: transmission_benefit = value; break;
    case Metric::K3: dispatchable_capacity = value; break;
    case Metric::K4: short_term_variability = value; break;
  }
}

namespace {

double mean_of(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorKind::EmptyInput, "mean of an empty series");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double dispatchable_electricity(std::span<const double> balancing) { return mean_of(balancing); }

double transmission_benefit(const std::vector<std::span<const double>>& country_balancing,
                            std::span<const double> shares, std::span<const double> aggregate_balancing) {
  if (country_balancing.size() != shares.size())
    throw Error(ErrorKind::InvalidArgument, "one share per country balancing series is required");
  double isolated = 0.0;
  for (std::size_t n = 0; n < country_balancing.size(); ++n) {
    if (country_balancing[n].size() != aggregate_balancing.size())
      throw Error(ErrorKind::AxisMismatch, "country and aggregate balancing differ in length");
    isolated += shares[n] * mean_of(country_balancing[n]);
  }
  // Convexity makes this non-negative up to rounding; clamp the rounding.
  return std::max(0.0, isolated - mean_of(aggregate_balancing));
}

double dispatchable_capacity(std::span<const double> balancing) {
  if (balancing.empty()) throw Error(ErrorKind::EmptyInput, "capacity of an empty series");
  return *std::max_element(balancing.begin(), balancing.end());
}

double dispatchable_capacity_quantile(std::span<const double> balancing, double q) {
  if (balancing.empty()) throw Error(ErrorKind::EmptyInput, "quantile of an empty series");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::InvalidArgument, "quantile must lie in [0,1]");
  std::vector<double> sorted(balancing.begin(), balancing.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted_quantile(sorted, q);
}

double short_term_variability(std::span<const double> balancing) {
  if (balancing.size() < 3) throw Error(ErrorKind::TooShort, "variability needs at least 3 values");
  const std::size_t n = balancing.size() - 1;
  double mean = 0.0;
  for (std::size_t t = 1; t <= n; ++t) mean += balancing[t] - balancing[t - 1];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t t = 1; t <= n; ++t) {
    const double d = balancing[t] - balancing[t - 1] - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(n - 1));
}

KeyMetrics key_metrics(const mismatch::MismatchSet& set, std::size_t begin, std::size_t end,
                       const MetricOptions& options) {
  if (end > set.aggregate_delta.size() || begin >= end)
    throw Error(ErrorKind::InvalidArgument, "metric range outside the mismatch set");
  const std::span<const double> agg(set.aggregate_parts.balancing.data() + begin, end - begin);
  std::vector<std::span<const double>> countries;
  countries.reserve(set.country_parts.size());
  for (const auto& p : set.country_parts) countries.emplace_back(p.balancing.data() + begin, end - begin);
  KeyMetrics k;
  k.dispatchable_electricity = dispatchable_electricity(agg);
  k.transmission_benefit = transmission_benefit(countries, set.shares, agg);
  k.dispatchable_capacity = options.capacity_quantile ? dispatchable_capacity_quantile(agg, *options.capacity_quantile)
                                                      : dispatchable_capacity(agg);
  k.short_term_variability = short_term_variability(agg);
  return k;
}

AnnualMetricSeries annual_metrics(const mismatch::MismatchSet& set, const mismatch::ScenarioDescriptor& scenario,
                                  const MetricOptions& options) {
  weather::require_whole_years(set.time);
  AnnualMetricSeries out{scenario, {}, {}};
  const auto per_year = static_cast<std::size_t>(set.time.steps_per_year);
  for (int y = 0; y < set.time.n_years(); ++y) {
    const auto begin = static_cast<std::size_t>(y) * per_year;
    out.years.push_back(set.time.start_year + y);
    out.values.push_back(key_metrics(set, begin, begin + per_year, options));
  }
  return out;
}

MeanSigma mean_sigma(std::span<const double> values) {
  MeanSigma r{mean_of(values), 0.0};
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.sigma = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return r;
}

std::vector<std::size_t> window_offsets(std::size_t n_years, int window_years, WindowMode mode) {
  if (window_years < 1) throw Error(ErrorKind::InvalidArgument, "window length must be positive");
  const auto w = static_cast<std::size_t>(window_years);
  if (n_years < w)
    throw Error(ErrorKind::InsufficientYears,
                std::to_string(n_years) + " years available, window needs " + std::to_string(w));
  std::vector<std::size_t> out;
  const std::size_t step = mode == WindowMode::Rolling ? 1 : w;
  for (std::size_t s = 0; s + w <= n_years; s += step) out.push_back(s);
  return out;
}

std::vector<WindowStats> window_stats(const AnnualMetricSeries& series, int window_years, WindowMode mode) {
  std::vector<WindowStats> out;
  std::vector<double> buf(static_cast<std::size_t>(std::max(window_years, 0)));
  for (auto offset : window_offsets(series.values.size(), window_years, mode)) {
    WindowStats ws{series.years[offset], window_years, {}, {}};
    for (auto m : kAllMetrics) {
      for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = series.values[offset + i].get(m);
      const auto ms = mean_sigma(buf);
      ws.mean.set(m, ms.mean);
      ws.sigma.set(m, ms.sigma);
    }
    out.push_back(ws);
  }
  return out;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::InvalidArgument, "paired samples differ in length");
  if (a.size() < 2) throw Error(ErrorKind::TooShort, "paired t-test needs at least 2 pairs");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const auto ms = mean_sigma(d);
  TTestResult r;
  r.degrees_of_freedom = static_cast<int>(n - 1);
  if (ms.sigma == 0.0) {
    if (ms.mean == 0.0) return r;
    r.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), ms.mean);
    r.p_value = 0.0;
    r.reject_at_95 = true;
    return r;
  }
  r.t_statistic = ms.mean / (ms.sigma / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(r.degrees_of_freedom));
  r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t_statistic))));
  r.reject_at_95 = r.p_value < 0.05;
  return r;
}

BoxSummary box_summary(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "box summary of no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return {sorted.front(), sorted_quantile(sorted, 0.25), sorted_quantile(sorted, 0.5), sorted_quantile(sorted, 0.75),
          sorted.back()};
}

}  // namespace vrekit::metrics
