#pragma once

// End-to-end orchestration: validate inputs, run the analysis, compare runs.
//
// A run executes the stages ingest, bias-adjust, demand-model, mismatch,
// metrics and reports. Outputs are staged and only moved into the output
// directory on success; a failed run leaves its partial outputs in
// `<out>/quarantine` together with `error.txt`.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vrekit/error.hpp"
#include "vrekit/run_config.hpp"

namespace vrekit::pipeline {

inline constexpr std::string_view kVersion = "1.0.0";

struct Finding {
  ErrorKind kind;
  std::string subject;  // file path, country code or config key
  std::string message;
};

std::string to_string(const Finding& f);

/// Every problem found in the config and the files it references. Never throws.
std::vector<Finding> validate(const std::filesystem::path& config_path);
std::vector<Finding> validate(const config::RunConfig& cfg);

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, ErrorKind kind, const std::string& cause);

  [[nodiscard]] const std::string& stage() const noexcept { return stage_; }
  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  std::string stage_;
  ErrorKind kind_;
};

struct RunResult {
  std::filesystem::path output_directory;
  std::vector<std::filesystem::path> reports;  // relative to output_directory
};

/// `config_text` is recorded verbatim in the manifest. Throws StageError.
RunResult run(const config::RunConfig& cfg, const std::filesystem::path& out_dir, std::string_view config_text = {});

/// Loads the config (INI or manifest) and runs it. `out_dir` overrides
/// `[output] directory`. Config errors are reported as stage "config".
RunResult run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir = {});

/// Cross-model comparison of completed run directories into one CSV.
/// Throws GridMismatch when alpha grids or scenario sets differ.
void compare(const std::vector<std::filesystem::path>& run_dirs, const std::filesystem::path& out_csv);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

}  // namespace vrekit::pipeline
