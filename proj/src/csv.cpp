#include "vrekit/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "vrekit/error.hpp"

namespace vrekit::csv {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string data;
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  in.seekg(0, std::ios::beg);
  data.resize(static_cast<std::size_t>(size));
  in.read(data.data(), size);
  if (!in) throw Error(ErrorKind::Io, "failed reading " + path.string());
  return data;
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

bool LineReader::next(std::string_view& line) {
  if (pos_ >= text_.size()) return false;
  const auto end = text_.find('\n', pos_);
  const auto stop = end == std::string_view::npos ? text_.size() : end;
  line = text_.substr(pos_, stop - pos_);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  pos_ = stop + 1;
  ++line_number_;
  return true;
}

void split(std::string_view line, std::vector<std::string_view>& out, char sep) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

namespace {

template <typename T>
bool parse_integral(std::string_view field, T& out) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && first != last;
}

}  // namespace

bool parse(std::string_view field, double& out) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && first != last;
}

bool parse(std::string_view field, long long& out) { return parse_integral(field, out); }
bool parse(std::string_view field, int& out) { return parse_integral(field, out); }
bool parse(std::string_view field, std::size_t& out) { return parse_integral(field, out); }

void append(std::string& out, double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

void append(std::string& out, long long value) {
  char buf[24];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

std::string format(double value) {
  std::string s;
  append(s, value);
  return s;
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(ErrorKind::MalformedFile, "missing column '" + std::string(name) + "'");
}

Table read_table(const std::filesystem::path& path) {
  const auto text = read_file(path);
  LineReader reader(text);
  Table table;
  std::string_view line;
  std::vector<std::string_view> fields;
  bool have_header = false;
  while (reader.next(line)) {
    if (line.empty() || line.front() == '#') continue;
    split(line, fields);
    std::vector<std::string> row;
    row.reserve(fields.size());
    for (auto f : fields) row.emplace_back(trim(f));
    if (!have_header) {
      table.header = std::move(row);
      have_header = true;
      continue;
    }
    if (row.size() != table.header.size()) {
      std::ostringstream msg;
      msg << path.string() << ":" << reader.line_number() << ": expected " << table.header.size()
          << " fields, got " << row.size();
      throw Error(ErrorKind::MalformedFile, msg.str());
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(ErrorKind::MalformedFile, path.string() + ": empty file");
  return table;
}

}  // namespace vrekit::csv
