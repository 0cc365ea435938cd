#pragma once

// Distribution matching of capacity factors by relative-entropy minimization.
//
// A transform is a single multiplicative scale on the pre-conversion driver
// (wind speed or irradiance). It is fitted once on the historical period by
// exhaustive search over a fixed grid and then applied unchanged to every
// scenario.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vrekit/converters.hpp"

namespace vrekit::bias {

inline constexpr std::size_t kDefaultBins = 100;
inline constexpr double kSmoothing = 1e-9;

/// Probability mass on a uniform partition of [0, 1].
struct CFHistogram {
  std::vector<double> mass;
  [[nodiscard]] std::size_t bin_count() const noexcept { return mass.size(); }
};

/// Right-open bins except the last, which is closed at 1. Each bin receives
/// `smoothing` extra mass before renormalization.
CFHistogram histogram(std::span<const double> values, std::size_t bin_count = kDefaultBins,
                      double smoothing = kSmoothing);

/// D(P || Q) in nats, with 0 * ln(0 / q) = 0.
double relative_entropy(const CFHistogram& p, const CFHistogram& q);

/// Scales first/denominator, (first+stride)/denominator, ..., last/denominator.
/// Integer steps keep grid values exact (1.25 is 1250/1000, not 0.5 + 75 * 0.01).
struct ScaleGrid {
  int first = 500;
  int last = 2000;
  int stride = 10;
  int denominator = 1000;

  /// Grid from decimal bounds and step, resolved to 1/1000 units.
  static ScaleGrid from_range(double lo, double hi, double step);
  [[nodiscard]] std::vector<double> values() const;
};

struct BiasTransform {
  convert::Technology technology = convert::Technology::Wind;
  double scale = 1.0;
  double fitted_divergence = 0.0;
  /// Divergence of the unadjusted conversion (scale 1), or NaN when 1 is not on the grid.
  double unadjusted_divergence = 0.0;
};

/// Maps a driver scale to the resulting country CF series.
using Conversion = std::function<std::vector<double>(double scale)>;

/// Minimizes D(hist(convert(s)) || reference) over the grid. Exact ties go to
/// the scale nearest 1.0, then to the smaller scale.
BiasTransform fit_bias_transform(convert::Technology technology, const CFHistogram& reference,
                                 const Conversion& conversion, const ScaleGrid& grid = {});

convert::CapacityFactorSeries apply_bias_transform(const BiasTransform& transform, const Conversion& conversion,
                                                   const std::string& country, const weather::TimeAxis& time);

/// Capacity-factor samples keyed by (country, technology).
using ReferenceSamples = std::map<std::pair<std::string, convert::Technology>, std::vector<double>>;

/// Reads `country,technology,value`; merges into `into` so wind and solar may
/// live in separate files.
void load_reference_samples(const std::filesystem::path& path, ReferenceSamples& into);
void write_reference_samples(const std::filesystem::path& path, const ReferenceSamples& samples);

struct TransformRecord {
  std::string country;
  BiasTransform transform;
};
void write_transforms(const std::filesystem::path& path, const std::vector<TransformRecord>& records);
std::vector<TransformRecord> load_transforms(const std::filesystem::path& path);

}  // namespace vrekit::bias
