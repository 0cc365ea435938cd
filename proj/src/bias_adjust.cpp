#include "vrekit/bias_adjust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vrekit/csv.hpp"
#include "vrekit/error.hpp"

namespace vrekit::bias {

CFHistogram histogram(std::span<const double> values, std::size_t bin_count, double smoothing) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "histogram of an empty sample");
  if (bin_count < 2) throw Error(ErrorKind::InvalidArgument, "histogram needs at least 2 bins");
  std::vector<std::size_t> counts(bin_count, 0);
  const double nbins = static_cast<double>(bin_count);
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::OutOfRangeValue, "capacity factor outside [0,1]");
    auto bin = static_cast<std::size_t>(v * nbins);
    if (bin >= bin_count) bin = bin_count - 1;
    ++counts[bin];
  }
  const double n = static_cast<double>(values.size());
  CFHistogram h{std::vector<double>(bin_count)};
  double total = 0.0;
  for (std::size_t i = 0; i < bin_count; ++i) {
    h.mass[i] = static_cast<double>(counts[i]) / n + smoothing;
    total += h.mass[i];
  }
  for (auto& m : h.mass) m /= total;
  return h;
}

double relative_entropy(const CFHistogram& p, const CFHistogram& q) {
  if (p.bin_count() != q.bin_count())
    throw Error(ErrorKind::BinMismatch, "histograms have " + std::to_string(p.bin_count()) + " and " +
                                            std::to_string(q.bin_count()) + " bins");
  double d = 0.0;
  for (std::size_t i = 0; i < p.bin_count(); ++i) {
    const double pi = p.mass[i];
    if (pi <= 0.0) continue;
    const double qi = q.mass[i];
    if (qi <= 0.0) return std::numeric_limits<double>::infinity();
    d += pi * std::log(pi / qi);
  }
  return std::max(d, 0.0);
}

ScaleGrid ScaleGrid::from_range(double lo, double hi, double step) {
  constexpr int den = 1000;
  ScaleGrid g{static_cast<int>(std::lround(lo * den)), static_cast<int>(std::lround(hi * den)),
              static_cast<int>(std::lround(step * den)), den};
  if (g.stride <= 0 || g.first <= 0) throw Error(ErrorKind::InvalidArgument, "scale grid needs positive bounds and step");
  return g;
}

std::vector<double> ScaleGrid::values() const {
  std::vector<double> out;
  if (stride <= 0 || denominator <= 0) return out;
  for (int k = first; k <= last; k += stride) out.push_back(static_cast<double>(k) / denominator);
  return out;
}

BiasTransform fit_bias_transform(convert::Technology technology, const CFHistogram& reference,
                                 const Conversion& conversion, const ScaleGrid& grid) {
  const auto scales = grid.values();
  if (scales.empty()) throw Error(ErrorKind::SearchGridEmpty, "bias search grid is empty");
  BiasTransform best{technology, 0.0, std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::quiet_NaN()};
  bool have = false;
  for (double s : scales) {
    const auto cf = conversion(s);
    const double d = relative_entropy(histogram(cf, reference.bin_count()), reference);
    if (s == 1.0) best.unadjusted_divergence = d;
    const bool better = !have || d < best.fitted_divergence ||
                        (d == best.fitted_divergence &&
                         (std::abs(s - 1.0) < std::abs(best.scale - 1.0) ||
                          (std::abs(s - 1.0) == std::abs(best.scale - 1.0) && s < best.scale)));
    if (better) {
      best.scale = s;
      best.fitted_divergence = d;
      have = true;
    }
  }
  return best;
}

convert::CapacityFactorSeries apply_bias_transform(const BiasTransform& transform, const Conversion& conversion,
                                                   const std::string& country, const weather::TimeAxis& time) {
  return {country, transform.technology, time, conversion(transform.scale)};
}

void load_reference_samples(const std::filesystem::path& path, ReferenceSamples& into) {
  const auto text = csv::read_file(path);
  csv::LineReader reader(text);
  std::string_view line;
  std::vector<std::string_view> f;
  bool header = false;
  while (reader.next(line)) {
    if (csv::trim(line).empty()) continue;
    csv::split(line, f);
    if (!header) {
      if (f.size() != 3 || csv::trim(f[0]) != "country" || csv::trim(f[1]) != "technology" ||
          csv::trim(f[2]) != "value")
        throw Error(ErrorKind::MalformedFile, path.string() + ": expected header 'country,technology,value'");
      header = true;
      continue;
    }
    double v = 0.0;
    if (f.size() != 3 || !csv::parse(f[2], v))
      throw Error(ErrorKind::MalformedFile, path.string() + ":" + std::to_string(reader.line_number()) +
                                                ": expected 'country,technology,value'");
    if (!(v >= 0.0 && v <= 1.0))
      throw Error(ErrorKind::OutOfRangeValue, path.string() + ":" + std::to_string(reader.line_number()) +
                                                  ": reference CF outside [0,1]");
    into[{std::string(csv::trim(f[0])), convert::parse_technology(csv::trim(f[1]))}].push_back(v);
  }
  if (!header) throw Error(ErrorKind::MalformedFile, path.string() + ": empty reference file");
}

void write_reference_samples(const std::filesystem::path& path, const ReferenceSamples& samples) {
  std::string out = "country,technology,value\n";
  for (const auto& [key, values] : samples)
    for (double v : values) csv::append_row(out, key.first, convert::to_string(key.second), v);
  csv::write_file(path, out);
}

void write_transforms(const std::filesystem::path& path, const std::vector<TransformRecord>& records) {
  std::string out = "country,technology,scale,divergence\n";
  for (const auto& r : records)
    csv::append_row(out, r.country, convert::to_string(r.transform.technology), r.transform.scale,
                    r.transform.fitted_divergence);
  csv::write_file(path, out);
}

std::vector<TransformRecord> load_transforms(const std::filesystem::path& path) {
  const auto table = csv::read_table(path);
  const auto c_country = table.column("country");
  const auto c_tech = table.column("technology");
  const auto c_scale = table.column("scale");
  const auto c_div = table.column("divergence");
  std::vector<TransformRecord> out;
  for (const auto& row : table.rows) {
    TransformRecord r;
    r.country = row[c_country];
    r.transform.technology = convert::parse_technology(row[c_tech]);
    if (!csv::parse(row[c_scale], r.transform.scale) || !csv::parse(row[c_div], r.transform.fitted_divergence))
      throw Error(ErrorKind::MalformedFile, path.string() + ": non-numeric transform");
    r.transform.unadjusted_divergence = std::numeric_limits<double>::quiet_NaN();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace vrekit::bias
