#include "vrekit/demand_model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "vrekit/csv.hpp"
#include "vrekit/error.hpp"

namespace vrekit::demand {

using weather::kStepsPerDay;
using weather::kStepsPerYear;

void DegreeDayParams::validate() const {
  if (!(heating_threshold < cooling_threshold))
    throw Error(ErrorKind::InvalidArgument, "heating threshold must be below cooling threshold");
}

std::vector<double> daily_mean_temperature(std::span<const double> three_hourly) {
  if (three_hourly.size() % kStepsPerDay != 0)
    throw Error(ErrorKind::LengthNotDivisible,
                "series of " + std::to_string(three_hourly.size()) + " steps is not whole days");
  std::vector<double> daily(three_hourly.size() / kStepsPerDay);
  for (std::size_t d = 0; d < daily.size(); ++d) {
    double sum = 0.0;
    for (int k = 0; k < kStepsPerDay; ++k) sum += three_hourly[d * kStepsPerDay + k];
    daily[d] = sum / kStepsPerDay;
  }
  return daily;
}

DegreeDays degree_days(double t, const DegreeDayParams& p) {
  return {std::max(0.0, p.heating_threshold - t), std::max(0.0, t - p.cooling_threshold)};
}

DegreeDaySeries degree_day_series(std::span<const double> daily, const DegreeDayParams& p) {
  p.validate();
  DegreeDaySeries s;
  s.heating.reserve(daily.size());
  s.cooling.reserve(daily.size());
  for (double t : daily) {
    const auto dd = degree_days(t, p);
    s.heating.push_back(dd.heating);
    s.cooling.push_back(dd.cooling);
  }
  return s;
}

namespace {

bool varies(const std::vector<double>& v) {
  return std::any_of(v.begin(), v.end(), [&](double x) { return x != v.front(); });
}

}  // namespace

DemandRegression fit_demand_regression(const DemandSeries& observed, const DegreeDaySeries& dd) {
  weather::require_whole_years(observed.time);
  if (observed.values.size() != observed.time.n_steps)
    throw Error(ErrorKind::AxisMismatch, "demand length does not match its time axis");
  const std::size_t n_days = observed.time.n_steps / kStepsPerDay;
  if (dd.days() != n_days || dd.cooling.size() != n_days)
    throw Error(ErrorKind::AxisMismatch, "degree-day series covers " + std::to_string(dd.days()) +
                                             " days, demand covers " + std::to_string(n_days));

  std::vector<double> totals(n_days, 0.0);
  for (std::size_t d = 0; d < n_days; ++d)
    for (int k = 0; k < kStepsPerDay; ++k) totals[d] += observed.values[d * kStepsPerDay + k];

  DemandRegression reg;
  reg.country = observed.country;
  reg.heating_se = std::numeric_limits<double>::quiet_NaN();
  reg.cooling_se = std::numeric_limits<double>::quiet_NaN();
  const bool use_heating = varies(dd.heating);
  const bool use_cooling = varies(dd.cooling);
  reg.singular = !use_heating && !use_cooling;

  const int p = 1 + int(use_heating) + int(use_cooling);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n_days), p);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n_days));
  for (std::size_t d = 0; d < n_days; ++d) {
    const auto i = static_cast<Eigen::Index>(d);
    int col = 0;
    x(i, col++) = 1.0;
    if (use_heating) x(i, col++) = dd.heating[d];
    if (use_cooling) x(i, col++) = dd.cooling[d];
    y(i) = totals[d];
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < p) throw Error(ErrorKind::InvalidArgument, "degree-day regressors are collinear");
  const Eigen::VectorXd beta = qr.solve(y);
  reg.intercept = beta(0);
  {
    int col = 1;
    if (use_heating) reg.heating_coeff = beta(col++);
    if (use_cooling) reg.cooling_coeff = beta(col++);
  }
  if (static_cast<Eigen::Index>(n_days) > p) {
    const Eigen::VectorXd resid = y - x * beta;
    const double sigma2 = resid.squaredNorm() / static_cast<double>(static_cast<Eigen::Index>(n_days) - p);
    const Eigen::MatrixXd cov = sigma2 * (x.transpose() * x).inverse();
    int col = 1;
    if (use_heating) {
      reg.heating_se = std::sqrt(cov(col, col));
      ++col;
    }
    if (use_cooling) reg.cooling_se = std::sqrt(cov(col, col));
  }
  reg.heating_coeff = std::max(0.0, reg.heating_coeff);
  reg.cooling_coeff = std::max(0.0, reg.cooling_coeff);

  const int n_years = observed.time.n_years();
  reg.baseline.assign(kStepsPerYear, 0.0);
  for (std::size_t t = 0; t < observed.values.size(); ++t) {
    const std::size_t day = t / kStepsPerDay;
    const double response = (reg.heating_coeff * dd.heating[day] + reg.cooling_coeff * dd.cooling[day]) / kStepsPerDay;
    reg.baseline[t % kStepsPerYear] += observed.values[t] - response;
  }
  for (auto& b : reg.baseline) {
    b /= n_years;
    if (!(b > 0.0))
      throw Error(ErrorKind::OutOfRangeValue, "country " + reg.country + ": non-positive baseline demand after fit");
  }
  return reg;
}

DemandSeries synthesize_demand(const DemandRegression& reg, const DegreeDaySeries& dd, const weather::TimeAxis& time) {
  weather::require_whole_years(time);
  if (dd.days() * kStepsPerDay != time.n_steps || dd.cooling.size() != dd.heating.size())
    throw Error(ErrorKind::AxisMismatch, "degree-day series does not cover the target time axis");
  if (reg.baseline.size() != static_cast<std::size_t>(kStepsPerYear))
    throw Error(ErrorKind::InvalidArgument, "baseline profile must have one value per step of year");
  DemandSeries out{reg.country, time, std::vector<double>(time.n_steps)};
  for (std::size_t t = 0; t < time.n_steps; ++t) {
    const std::size_t day = t / kStepsPerDay;
    const double v = reg.baseline[t % kStepsPerYear] +
                     (reg.heating_coeff * dd.heating[day] + reg.cooling_coeff * dd.cooling[day]) / kStepsPerDay;
    out.values[t] = std::max(0.0, v);
  }
  return out;
}

std::map<std::string, std::vector<double>> load_demand_file(const std::filesystem::path& path) {
  const auto text = csv::read_file(path);
  csv::LineReader reader(text);
  std::string_view line;
  std::vector<std::string_view> f;
  std::map<std::string, std::vector<std::pair<std::size_t, double>>, std::less<>> rows;
  bool header = false;
  while (reader.next(line)) {
    if (csv::trim(line).empty()) continue;
    csv::split(line, f);
    if (!header) {
      if (f.size() != 3 || csv::trim(f[0]) != "country" || csv::trim(f[1]) != "time_index" || csv::trim(f[2]) != "mwh")
        throw Error(ErrorKind::MalformedFile, path.string() + ": expected header 'country,time_index,mwh'");
      header = true;
      continue;
    }
    std::size_t t = 0;
    double v = 0.0;
    if (f.size() != 3 || !csv::parse(f[1], t))
      throw Error(ErrorKind::MalformedFile, path.string() + ":" + std::to_string(reader.line_number()) +
                                                ": expected 'country,time_index,mwh'");
    if (!csv::parse(f[2], v) || !std::isfinite(v))
      throw Error(ErrorKind::MissingValue, path.string() + ":" + std::to_string(reader.line_number()) +
                                               ": missing demand value");
    if (v < 0.0)
      throw Error(ErrorKind::OutOfRangeValue, path.string() + ":" + std::to_string(reader.line_number()) +
                                                  ": negative demand");
    const auto code = csv::trim(f[0]);
    if (!weather::is_country_code(code))
      throw Error(ErrorKind::MalformedFile, path.string() + ": bad country code '" + std::string(code) + "'");
    auto it = rows.find(code);
    if (it == rows.end()) it = rows.emplace(std::string(code), std::vector<std::pair<std::size_t, double>>{}).first;
    it->second.emplace_back(t, v);
  }
  if (!header) throw Error(ErrorKind::MalformedFile, path.string() + ": empty demand file");
  std::map<std::string, std::vector<double>> out;
  for (auto& [country, entries] : rows) {
    std::sort(entries.begin(), entries.end());
    std::vector<double> series;
    series.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].first != i)
        throw Error(entries[i].first < i ? ErrorKind::MalformedFile : ErrorKind::TimeAxisGap,
                    path.string() + ": country " + country + " time indices are not contiguous at " +
                        std::to_string(i));
      series.push_back(entries[i].second);
    }
    out.emplace(country, std::move(series));
  }
  return out;
}

void write_demand_file(const std::filesystem::path& path, const std::vector<DemandSeries>& series) {
  std::string out = "country,time_index,mwh\n";
  for (const auto& s : series)
    for (std::size_t t = 0; t < s.values.size(); ++t) csv::append_row(out, s.country, t, s.values[t]);
  csv::write_file(path, out);
}

void write_regressions(const std::filesystem::path& coefficients_path, const std::filesystem::path& baseline_path,
                       const std::vector<DemandRegression>& regressions) {
  std::string coeffs = "country,heating_coeff,cooling_coeff\n";
  std::string baseline = "country,step_of_year,mwh\n";
  for (const auto& r : regressions) {
    csv::append_row(coeffs, r.country, r.heating_coeff, r.cooling_coeff);
    for (std::size_t s = 0; s < r.baseline.size(); ++s) csv::append_row(baseline, r.country, s, r.baseline[s]);
  }
  csv::write_file(coefficients_path, coeffs);
  csv::write_file(baseline_path, baseline);
}

std::vector<DemandRegression> load_regressions(const std::filesystem::path& coefficients_path,
                                               const std::filesystem::path& baseline_path) {
  const auto coeffs = csv::read_table(coefficients_path);
  const auto base = csv::read_table(baseline_path);
  std::vector<DemandRegression> out;
  std::map<std::string, std::size_t> index;
  const auto cc = coeffs.column("country");
  const auto ch = coeffs.column("heating_coeff");
  const auto cco = coeffs.column("cooling_coeff");
  for (const auto& row : coeffs.rows) {
    DemandRegression r;
    r.country = row[cc];
    if (!csv::parse(row[ch], r.heating_coeff) || !csv::parse(row[cco], r.cooling_coeff))
      throw Error(ErrorKind::MalformedFile, coefficients_path.string() + ": non-numeric coefficient");
    r.baseline.assign(kStepsPerYear, std::numeric_limits<double>::quiet_NaN());
    index[r.country] = out.size();
    out.push_back(std::move(r));
  }
  const auto bc = base.column("country");
  const auto bs = base.column("step_of_year");
  const auto bm = base.column("mwh");
  for (const auto& row : base.rows) {
    auto it = index.find(row[bc]);
    std::size_t s = 0;
    double v = 0.0;
    if (it == index.end() || !csv::parse(row[bs], s) || s >= static_cast<std::size_t>(kStepsPerYear) ||
        !csv::parse(row[bm], v))
      throw Error(ErrorKind::MalformedFile, baseline_path.string() + ": bad baseline row");
    out[it->second].baseline[s] = v;
  }
  for (const auto& r : out)
    for (double b : r.baseline)
      if (!std::isfinite(b)) throw Error(ErrorKind::MissingValue, "baseline incomplete for " + r.country);
  return out;
}

}  // namespace vrekit::demand
