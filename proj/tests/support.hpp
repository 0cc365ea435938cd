#pragma once

// Shared fixtures and independent reference implementations for the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "vrekit/csv.hpp"
#include "vrekit/weather_store.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("vrekit_" + tag + "_" + std::to_string(rd()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& p, const std::string& text) { vrekit::csv::write_file(p, text); }

inline std::vector<double> uniform(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline vrekit::weather::GridDefinition line_grid(std::size_t n) {
  vrekit::weather::GridDefinition g;
  for (std::size_t i = 0; i < n; ++i) g.cells.push_back({40.0 + 0.25 * static_cast<double>(i % 40), -5.0 + 0.5 * static_cast<double>(i)});
  return g;
}

/// Random positive weights normalized to one.
inline std::vector<double> random_shares(std::mt19937_64& rng, std::size_t n) {
  auto w = uniform(rng, n, 0.05, 1.0);
  double s = 0.0;
  for (double x : w) s += x;
  for (auto& x : w) x /= s;
  // Push rounding error into the last share so the sum is as close to 1 as doubles allow.
  double head = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) head += w[i];
  w.back() = 1.0 - head;
  return w;
}

inline bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

// ---- oracles ----

inline double oracle_mean(const std::vector<double>& v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

inline double oracle_sample_sd(const std::vector<double>& v) {
  const long double m = oracle_mean(v);
  long double ss = 0.0L;
  for (double x : v) ss += (x - m) * (x - m);
  return static_cast<double>(std::sqrt(ss / static_cast<long double>(v.size() - 1)));
}

/// Two-sided Student-t p-value for integer df from the closed-form finite
/// series of the t distribution function (odd and even df handled
/// separately), evaluated in long double.
inline long double student_t_two_sided_p(long double t, int df) {
  const long double theta = std::atan(std::abs(t) / std::sqrt(static_cast<long double>(df)));
  const long double s = std::sin(theta);
  const long double c = std::cos(theta);
  long double a = 0.0L;  // P(|T| <= |t|)
  if (df % 2 == 1) {
    long double sum = 0.0L;
    if (df > 1) {
      long double term = c;
      sum = term;
      for (int k = 3; k <= df - 2; k += 2) {
        term *= c * c * static_cast<long double>(k - 1) / static_cast<long double>(k);
        sum += term;
      }
    }
    a = 2.0L / std::numbers::pi_v<long double> * (theta + s * sum);
  } else {
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int k = 2; k <= df - 2; k += 2) {
      term *= c * c * static_cast<long double>(k - 1) / static_cast<long double>(k);
      sum += term;
    }
    a = s * sum;
  }
  return 1.0L - a;
}

/// Daily temperatures crossing both degree-day thresholds, with a
/// deterministic wobble so HDD and CDD are not collinear with the intercept.
inline std::vector<double> seasonal_daily_temperature(int years, double offset = 0.0) {
  std::vector<double> t(static_cast<std::size_t>(years) * 365);
  for (std::size_t d = 0; d < t.size(); ++d) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(d % 365) / 365.0;
    t[d] = 12.0 - 13.0 * std::cos(phase) + 2.5 * std::sin(0.7 * static_cast<double>(d)) + offset;
  }
  return t;
}

/// Per-step demand = diurnal profile (constant daily sum) + (h * HDD + c * CDD) / 8
/// + N(0, noise_sd) per step.
inline std::vector<double> planted_demand(const std::vector<double>& hdd, const std::vector<double>& cdd, double h,
                                          double c, double noise_sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sd);
  std::vector<double> v(hdd.size() * 8);
  for (std::size_t t = 0; t < v.size(); ++t) {
    const std::size_t d = t / 8;
    const double hour = 3.0 * static_cast<double>(t % 8) + 1.5;
    const double profile = 100.0 + 15.0 * std::cos(2.0 * std::numbers::pi * (hour - 14.0) / 24.0);
    v[t] = profile + (h * hdd[d] + c * cdd[d]) / 8.0;
    if (noise_sd > 0.0) v[t] += noise(rng);
  }
  return v;
}

/// Inclusive (linear interpolation) quantile via a full sort.
inline double oracle_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace testing_support
