#pragma once

// Minimal text I/O shared by the file formats: whole-file reads, a line
// cursor that tracks line numbers, comma splitting without allocation, and
// locale-independent number conversion. Doubles are always written in the
// shortest form that parses back to the identical bit pattern.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vrekit::csv {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  /// Advances to the next line (CR stripped). Returns false at end of input.
  bool next(std::string_view& line);
  [[nodiscard]] std::size_t line_number() const noexcept { return line_number_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_number_ = 0;
};

/// Splits on `sep` into `out` (cleared first). Views alias `line`.
void split(std::string_view line, std::vector<std::string_view>& out, char sep = ',');

std::string_view trim(std::string_view s);

/// Strict parses: the whole field must be consumed. Return false on failure.
bool parse(std::string_view field, double& out);
bool parse(std::string_view field, long long& out);
bool parse(std::string_view field, int& out);
bool parse(std::string_view field, std::size_t& out);

void append(std::string& out, double value);
void append(std::string& out, long long value);
inline void append(std::string& out, int value) { append(out, static_cast<long long>(value)); }
inline void append(std::string& out, std::size_t value) { append(out, static_cast<long long>(value)); }
inline void append(std::string& out, std::string_view value) { out.append(value); }
inline void append(std::string& out, const char* value) { out.append(value); }
inline void append(std::string& out, const std::string& value) { out.append(value); }

std::string format(double value);

/// Appends one comma-separated row terminated by '\n'.
template <typename... Fields>
void append_row(std::string& out, const Fields&... fields) {
  bool first = true;
  ((out.append(first ? "" : ","), append(out, fields), first = false), ...);
  out.push_back('\n');
}

/// Header-indexed table, used where the column layout is looked up by name.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::size_t column(std::string_view name) const;  // throws MalformedFile
};

Table read_table(const std::filesystem::path& path);

}  // namespace vrekit::csv
