#pragma once

// Gridded 3-hourly climate fields: grid definitions, field series, country
// weights and their portable CSV formats.
//
// Calendar is 365-day no-leap with 8 steps per day (2920 per year). Field
// values are stored cell-major so each cell's time series is contiguous.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrekit/error.hpp"

namespace vrekit::weather {

inline constexpr int kStepsPerDay = 8;
inline constexpr int kDaysPerYear = 365;
inline constexpr int kStepsPerYear = kStepsPerDay * kDaysPerYear;
inline constexpr double kStepHours = 3.0;

struct GridCell {
  double lat = 0.0;
  double lon = 0.0;
  bool operator==(const GridCell&) const = default;
};

/// Cells are indexed by position: cell_id == index.
struct GridDefinition {
  std::vector<GridCell> cells;

  [[nodiscard]] std::size_t cell_count() const noexcept { return cells.size(); }
  bool operator==(const GridDefinition&) const = default;
};

struct TimeAxis {
  int start_year = 0;
  int steps_per_year = kStepsPerYear;
  std::size_t n_steps = 0;

  [[nodiscard]] bool whole_years() const noexcept {
    return n_steps > 0 && n_steps % static_cast<std::size_t>(steps_per_year) == 0;
  }
  [[nodiscard]] int n_years() const noexcept { return static_cast<int>(n_steps / steps_per_year); }
  [[nodiscard]] int end_year() const noexcept { return start_year + n_years() - 1; }
  bool operator==(const TimeAxis&) const = default;
};

/// Throws TimeAxisGap unless the axis is 3-hourly and covers whole years.
void require_whole_years(const TimeAxis& axis);

enum class Variable { WindSpeed, Irradiance, Temperature };

std::string_view to_string(Variable v);
Variable parse_variable(std::string_view tag);  // throws MalformedFile

/// Immutable after construction; the constructor enforces finiteness and the
/// physical range of the variable.
class FieldSeries {
 public:
  FieldSeries(Variable variable, GridDefinition grid, TimeAxis time, std::vector<double> cell_major_values);

  [[nodiscard]] Variable variable() const noexcept { return variable_; }
  [[nodiscard]] const GridDefinition& grid() const noexcept { return grid_; }
  [[nodiscard]] const TimeAxis& time() const noexcept { return time_; }
  [[nodiscard]] std::size_t n_steps() const noexcept { return time_.n_steps; }
  [[nodiscard]] std::size_t cell_count() const noexcept { return grid_.cell_count(); }

  [[nodiscard]] double at(std::size_t step, std::size_t cell) const { return values_[cell * time_.n_steps + step]; }
  [[nodiscard]] std::span<const double> cell_series(std::size_t cell) const {
    return {values_.data() + cell * time_.n_steps, time_.n_steps};
  }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

  bool operator==(const FieldSeries&) const = default;

 private:
  Variable variable_;
  GridDefinition grid_;
  TimeAxis time_;
  std::vector<double> values_;
};

struct WeightEntry {
  std::size_t cell_id = 0;
  double weight = 0.0;
  bool operator==(const WeightEntry&) const = default;
};

struct CountryWeights {
  std::string country;
  std::vector<WeightEntry> entries;
  bool operator==(const CountryWeights&) const = default;
};

/// Countries sorted by code.
using WeightTable = std::vector<CountryWeights>;

inline constexpr double kWeightSumTolerance = 1e-9;

[[nodiscard]] bool is_country_code(std::string_view code);

struct WeightIssue {
  ErrorKind kind;
  std::string country;
  std::string message;
};

/// Every violated invariant (empty when valid).
std::vector<WeightIssue> weight_issues(const WeightTable& table, const GridDefinition& grid);

/// Throws UnknownCell / WeightSumInvalid / MalformedFile for the first issue.
void validate_weights(const CountryWeights& weights, const GridDefinition& grid);

/// Uniform weights over the cells assigned to each country.
WeightTable uniform_weights(const std::vector<std::pair<std::string, std::vector<std::size_t>>>& assignment);

GridDefinition load_grid_definition(const std::filesystem::path& path);
void write_grid_definition(const std::filesystem::path& path, const GridDefinition& grid);

FieldSeries load_field_series(const std::filesystem::path& path, const GridDefinition& grid, Variable variable);
void write_field_series(const std::filesystem::path& path, const FieldSeries& field);

/// Reads the metadata preamble only (cheap header check).
struct FieldHeader {
  Variable variable;
  TimeAxis time;
  std::size_t cells = 0;
};
FieldHeader read_field_header(const std::filesystem::path& path);

/// Validates every country against `grid`; throws on the first issue.
WeightTable load_country_weights(const std::filesystem::path& path, const GridDefinition& grid);
/// Parses without checking sums or cell existence (used by the validator).
WeightTable parse_country_weights(const std::filesystem::path& path);
void write_country_weights(const std::filesystem::path& path, const WeightTable& table);

const CountryWeights& find_country(const WeightTable& table, std::string_view country);

/// output(t) = sum over entries of weight * field(t, cell).
std::vector<double> aggregate_to_country(const FieldSeries& field, const CountryWeights& weights);

}  // namespace vrekit::weather
