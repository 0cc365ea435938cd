#include "vrekit/weather_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "vrekit/csv.hpp"
#include "vrekit/error.hpp"

namespace vrekit::weather {

namespace {

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

void expect_header(std::string_view line, std::string_view expected, const std::filesystem::path& path,
                   std::size_t line_no) {
  std::string normalized;
  for (char c : line)
    if (c != ' ' && c != '\t') normalized.push_back(c);
  if (normalized != expected)
    throw Error(ErrorKind::MalformedFile,
                where(path, line_no) + "expected header '" + std::string(expected) + "'");
}

bool next_content_line(csv::LineReader& reader, std::string_view& line) {
  while (reader.next(line)) {
    if (!csv::trim(line).empty()) return true;
  }
  return false;
}

}  // namespace

void require_whole_years(const TimeAxis& axis) {
  if (axis.steps_per_year != kStepsPerYear)
    throw Error(ErrorKind::TimeAxisGap, "steps_per_year must be " + std::to_string(kStepsPerYear));
  if (!axis.whole_years())
    throw Error(ErrorKind::TimeAxisGap,
                "n_steps=" + std::to_string(axis.n_steps) + " is not a positive multiple of steps_per_year");
}

std::string_view to_string(Variable v) {
  switch (v) {
    case Variable::WindSpeed: return "wind_speed";
    case Variable::Irradiance: return "irradiance";
    case Variable::Temperature: return "temperature";
  }
  return "unknown";
}

Variable parse_variable(std::string_view tag) {
  if (tag == "wind_speed") return Variable::WindSpeed;
  if (tag == "irradiance") return Variable::Irradiance;
  if (tag == "temperature") return Variable::Temperature;
  throw Error(ErrorKind::MalformedFile, "unknown variable tag '" + std::string(tag) + "'");
}

FieldSeries::FieldSeries(Variable variable, GridDefinition grid, TimeAxis time, std::vector<double> values)
    : variable_(variable), grid_(std::move(grid)), time_(time), values_(std::move(values)) {
  if (values_.size() != time_.n_steps * grid_.cell_count())
    throw Error(ErrorKind::AxisMismatch, "field value count does not match steps x cells");
  double lo = 0.0;
  double hi = INFINITY;
  if (variable_ == Variable::Temperature) {
    lo = -90.0;
    hi = 60.0;
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!std::isfinite(v))
      throw Error(ErrorKind::MissingValue, "non-finite value at step " + std::to_string(i % time_.n_steps) +
                                               ", cell " + std::to_string(i / time_.n_steps));
    if (v < lo || v > hi) {
      std::ostringstream msg;
      msg << to_string(variable_) << " value " << v << " outside [" << lo << ", " << hi << "] at step "
          << i % time_.n_steps << ", cell " << i / time_.n_steps;
      throw Error(ErrorKind::OutOfRangeValue, msg.str());
    }
  }
}

bool is_country_code(std::string_view code) {
  return code.size() == 2 && std::all_of(code.begin(), code.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

std::vector<WeightIssue> weight_issues(const WeightTable& table, const GridDefinition& grid) {
  std::vector<WeightIssue> issues;
  for (const auto& cw : table) {
    double sum = 0.0;
    for (const auto& e : cw.entries) {
      if (e.cell_id >= grid.cell_count())
        issues.push_back({ErrorKind::UnknownCell, cw.country,
                          "country " + cw.country + ": unknown cell " + std::to_string(e.cell_id)});
      if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
        issues.push_back({ErrorKind::MalformedFile, cw.country,
                          "country " + cw.country + ": negative or non-finite weight for cell " +
                              std::to_string(e.cell_id)});
      sum += e.weight;
    }
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
      std::ostringstream msg;
      msg.precision(12);
      msg << "country " << cw.country << ": weights sum to " << sum << ", expected 1";
      issues.push_back({ErrorKind::WeightSumInvalid, cw.country, msg.str()});
    }
  }
  return issues;
}

void validate_weights(const CountryWeights& cw, const GridDefinition& grid) {
  double sum = 0.0;
  for (const auto& e : cw.entries) {
    if (e.cell_id >= grid.cell_count())
      throw Error(ErrorKind::UnknownCell, "country " + cw.country + ": unknown cell " + std::to_string(e.cell_id));
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
      throw Error(ErrorKind::MalformedFile, "country " + cw.country + ": negative weight");
    sum += e.weight;
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "country " << cw.country << ": weights sum to " << sum;
    throw Error(ErrorKind::WeightSumInvalid, msg.str());
  }
}

WeightTable uniform_weights(const std::vector<std::pair<std::string, std::vector<std::size_t>>>& assignment) {
  WeightTable table;
  for (const auto& [country, cells] : assignment) {
    if (cells.empty()) throw Error(ErrorKind::EmptyInput, "country " + country + " has no cells");
    CountryWeights cw{country, {}};
    const double w = 1.0 / static_cast<double>(cells.size());
    for (auto c : cells) cw.entries.push_back({c, w});
    table.push_back(std::move(cw));
  }
  std::sort(table.begin(), table.end(), [](const auto& a, const auto& b) { return a.country < b.country; });
  return table;
}

GridDefinition load_grid_definition(const std::filesystem::path& path) {
  const auto text = csv::read_file(path);
  csv::LineReader reader(text);
  std::string_view line;
  if (!next_content_line(reader, line)) throw Error(ErrorKind::MalformedFile, path.string() + ": empty grid file");
  expect_header(line, "cell_id,lat,lon", path, reader.line_number());

  std::map<std::size_t, GridCell> cells;
  std::vector<std::string_view> f;
  while (next_content_line(reader, line)) {
    csv::split(line, f);
    std::size_t id = 0;
    GridCell cell;
    if (f.size() != 3 || !csv::parse(f[0], id) || !csv::parse(f[1], cell.lat) || !csv::parse(f[2], cell.lon))
      throw Error(ErrorKind::MalformedFile, where(path, reader.line_number()) + "expected 'cell_id,lat,lon'");
    if (!(cell.lat >= -90.0 && cell.lat <= 90.0) || !(cell.lon >= -180.0 && cell.lon <= 180.0))
      throw Error(ErrorKind::OutOfRangeCoordinate,
                  where(path, reader.line_number()) + "coordinate out of range for cell " + std::to_string(id));
    if (!cells.emplace(id, cell).second)
      throw Error(ErrorKind::DuplicateCell, where(path, reader.line_number()) + "duplicate cell " + std::to_string(id));
  }
  if (cells.empty()) throw Error(ErrorKind::MalformedFile, path.string() + ": grid has no cells");
  GridDefinition grid;
  grid.cells.reserve(cells.size());
  std::size_t expected = 0;
  for (const auto& [id, cell] : cells) {
    if (id != expected)
      throw Error(ErrorKind::MalformedFile,
                  path.string() + ": cell ids must be contiguous from 0 (missing " + std::to_string(expected) + ")");
    grid.cells.push_back(cell);
    ++expected;
  }
  return grid;
}

void write_grid_definition(const std::filesystem::path& path, const GridDefinition& grid) {
  std::string out = "cell_id,lat,lon\n";
  for (std::size_t i = 0; i < grid.cell_count(); ++i) csv::append_row(out, i, grid.cells[i].lat, grid.cells[i].lon);
  csv::write_file(path, out);
}

namespace {

FieldHeader parse_preamble(std::string_view line, const std::filesystem::path& path) {
  auto body = csv::trim(line);
  if (body.empty() || body.front() != '#')
    throw Error(ErrorKind::MalformedFile, path.string() + ": missing '# variable=...' metadata line");
  body.remove_prefix(1);
  std::map<std::string, std::string, std::less<>> kv;
  std::vector<std::string_view> tokens;
  csv::split(body, tokens, ' ');
  for (auto tok : tokens) {
    tok = csv::trim(tok);
    if (tok.empty()) continue;
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::MalformedFile, path.string() + ": bad metadata token '" + std::string(tok) + "'");
    kv.emplace(std::string(tok.substr(0, eq)), std::string(tok.substr(eq + 1)));
  }
  auto get = [&](std::string_view key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw Error(ErrorKind::MalformedFile, path.string() + ": metadata lacks '" + std::string(key) + "'");
    return it->second;
  };
  FieldHeader h{parse_variable(get("variable")), {}, 0};
  if (!csv::parse(get("start_year"), h.time.start_year) || !csv::parse(get("steps_per_year"), h.time.steps_per_year) ||
      !csv::parse(get("n_steps"), h.time.n_steps) || !csv::parse(get("cells"), h.cells))
    throw Error(ErrorKind::MalformedFile, path.string() + ": non-numeric metadata");
  if (h.time.steps_per_year != kStepsPerYear)
    throw Error(ErrorKind::TimeAxisGap, path.string() + ": steps_per_year=" + std::to_string(h.time.steps_per_year) +
                                            " is not 3-hourly");
  if (h.time.n_steps == 0 || h.cells == 0)
    throw Error(ErrorKind::MalformedFile, path.string() + ": n_steps and cells must be positive");
  return h;
}

}  // namespace

FieldHeader read_field_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (!csv::trim(line).empty()) return parse_preamble(line, path);
  }
  throw Error(ErrorKind::MalformedFile, path.string() + ": empty field file");
}

FieldSeries load_field_series(const std::filesystem::path& path, const GridDefinition& grid, Variable variable) {
  const auto text = csv::read_file(path);
  csv::LineReader reader(text);
  std::string_view line;
  if (!next_content_line(reader, line)) throw Error(ErrorKind::MalformedFile, path.string() + ": empty field file");
  const auto header = parse_preamble(line, path);
  if (header.variable != variable)
    throw Error(ErrorKind::VariableMismatch, path.string() + ": file holds " + std::string(to_string(header.variable)) +
                                                 ", expected " + std::string(to_string(variable)));
  if (header.cells != grid.cell_count())
    throw Error(ErrorKind::MalformedFile, path.string() + ": cells=" + std::to_string(header.cells) +
                                              " but grid has " + std::to_string(grid.cell_count()));
  if (!next_content_line(reader, line)) throw Error(ErrorKind::MalformedFile, path.string() + ": missing header");
  expect_header(line, "time_index,cell_id,value", path, reader.line_number());

  const std::size_t n_steps = header.time.n_steps;
  const std::size_t n_cells = header.cells;
  std::vector<double> values(n_steps * n_cells, 0.0);
  std::vector<unsigned char> seen(values.size(), 0);
  std::vector<std::size_t> per_step(n_steps, 0);
  // A file cut off mid-line is reported as a gap in the time axis, not as a
  // malformed record.
  const bool unterminated = !text.empty() && text.back() != '\n';
  const auto last_line = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) + 1;
  auto fail = [&](ErrorKind kind, const std::string& msg) {
    if (unterminated && reader.line_number() == last_line)
      throw Error(ErrorKind::TimeAxisGap, where(path, reader.line_number()) + "file is truncated");
    throw Error(kind, where(path, reader.line_number()) + msg);
  };
  std::vector<std::string_view> f;
  f.reserve(4);
  while (next_content_line(reader, line)) {
    csv::split(line, f);
    if (f.size() != 3) fail(ErrorKind::MalformedFile, "expected 3 fields");
    std::size_t t = 0;
    std::size_t c = 0;
    if (!csv::parse(f[0], t) || !csv::parse(f[1], c)) fail(ErrorKind::MalformedFile, "bad time_index or cell_id");
    if (c >= n_cells) throw Error(ErrorKind::UnknownCell, where(path, reader.line_number()) + "cell " + std::to_string(c));
    if (t >= n_steps)
      throw Error(ErrorKind::TimeAxisGap,
                  where(path, reader.line_number()) + "time_index " + std::to_string(t) + " beyond n_steps");
    double v = 0.0;
    if (!csv::parse(f[2], v) || !std::isfinite(v)) fail(ErrorKind::MissingValue, "missing or non-finite value");
    const std::size_t idx = c * n_steps + t;
    if (seen[idx]) throw Error(ErrorKind::MalformedFile, where(path, reader.line_number()) + "duplicate record");
    seen[idx] = 1;
    values[idx] = v;
    ++per_step[t];
  }
  std::size_t covered = n_steps;
  while (covered > 0 && per_step[covered - 1] == 0) --covered;
  if (covered < n_steps)
    throw Error(ErrorKind::TimeAxisGap, path.string() + ": records end at time_index " +
                                            std::to_string(covered == 0 ? 0 : covered - 1) + " of " +
                                            std::to_string(n_steps) + " declared steps");
  for (std::size_t t = 0; t < n_steps; ++t) {
    if (per_step[t] == 0)
      throw Error(ErrorKind::TimeAxisGap, path.string() + ": no records for time_index " + std::to_string(t) +
                                              " (steps are not uniform)");
  }
  for (std::size_t t = 0; t < n_steps; ++t) {
    if (per_step[t] == n_cells) continue;
    for (std::size_t c = 0; c < n_cells; ++c)
      if (!seen[c * n_steps + t])
        throw Error(unterminated ? ErrorKind::TimeAxisGap : ErrorKind::MissingValue,
                    path.string() + ": no value for time_index " + std::to_string(t) +
                                                 ", cell " + std::to_string(c));
  }
  return FieldSeries(variable, grid, header.time, std::move(values));
}

void write_field_series(const std::filesystem::path& path, const FieldSeries& field) {
  std::string out;
  out.reserve(field.values().size() * 20 + 128);
  out += "# variable=";
  out += to_string(field.variable());
  out += " start_year=" + std::to_string(field.time().start_year);
  out += " steps_per_year=" + std::to_string(field.time().steps_per_year);
  out += " n_steps=" + std::to_string(field.n_steps());
  out += " cells=" + std::to_string(field.cell_count()) + "\n";
  out += "time_index,cell_id,value\n";
  for (std::size_t t = 0; t < field.n_steps(); ++t)
    for (std::size_t c = 0; c < field.cell_count(); ++c) csv::append_row(out, t, c, field.at(t, c));
  csv::write_file(path, out);
}

WeightTable parse_country_weights(const std::filesystem::path& path) {
  const auto text = csv::read_file(path);
  csv::LineReader reader(text);
  std::string_view line;
  if (!next_content_line(reader, line)) throw Error(ErrorKind::MalformedFile, path.string() + ": empty weights file");
  expect_header(line, "country,cell_id,weight", path, reader.line_number());
  std::map<std::string, CountryWeights, std::less<>> by_country;
  std::vector<std::string_view> f;
  while (next_content_line(reader, line)) {
    csv::split(line, f);
    WeightEntry e;
    if (f.size() != 3 || !csv::parse(f[1], e.cell_id) || !csv::parse(f[2], e.weight))
      throw Error(ErrorKind::MalformedFile, where(path, reader.line_number()) + "expected 'country,cell_id,weight'");
    const auto code = csv::trim(f[0]);
    if (!is_country_code(code))
      throw Error(ErrorKind::MalformedFile, where(path, reader.line_number()) + "bad country code '" +
                                                std::string(code) + "'");
    if (e.weight < 0.0)
      throw Error(ErrorKind::MalformedFile, where(path, reader.line_number()) + "negative weight");
    auto& cw = by_country[std::string(code)];
    cw.country = std::string(code);
    cw.entries.push_back(e);
  }
  WeightTable table;
  for (auto& [code, cw] : by_country) table.push_back(std::move(cw));
  if (table.empty()) throw Error(ErrorKind::EmptyInput, path.string() + ": no weights");
  return table;
}

WeightTable load_country_weights(const std::filesystem::path& path, const GridDefinition& grid) {
  auto table = parse_country_weights(path);
  for (const auto& cw : table) {
    try {
      validate_weights(cw, grid);
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ": " + e.what());
    }
  }
  return table;
}

void write_country_weights(const std::filesystem::path& path, const WeightTable& table) {
  std::string out = "country,cell_id,weight\n";
  for (const auto& cw : table)
    for (const auto& e : cw.entries) csv::append_row(out, cw.country, e.cell_id, e.weight);
  csv::write_file(path, out);
}

const CountryWeights& find_country(const WeightTable& table, std::string_view country) {
  auto it = std::lower_bound(table.begin(), table.end(), country,
                             [](const CountryWeights& cw, std::string_view c) { return cw.country < c; });
  if (it == table.end() || it->country != country)
    throw Error(ErrorKind::InvalidArgument, "no weights for country " + std::string(country));
  return *it;
}

std::vector<double> aggregate_to_country(const FieldSeries& field, const CountryWeights& weights) {
  std::vector<double> out(field.n_steps(), 0.0);
  for (const auto& e : weights.entries) {
    if (e.cell_id >= field.cell_count())
      throw Error(ErrorKind::UnknownCell, "country " + weights.country + ": unknown cell " + std::to_string(e.cell_id));
    const auto series = field.cell_series(e.cell_id);
    for (std::size_t t = 0; t < out.size(); ++t) out[t] += e.weight * series[t];
  }
  return out;
}

}  // namespace vrekit::weather
