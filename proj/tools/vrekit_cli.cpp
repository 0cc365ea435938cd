// Command-line front end: validate | run | synth | compare.
//
// Exit codes: 0 ok, 1 validation findings, 2 any other failure.

#include <CLI11.hpp>
#include <iostream>

#include "vrekit/pipeline.hpp"
#include "vrekit/synth_weather.hpp"

namespace fs = std::filesystem;
using namespace vrekit;

int main(int argc, char** argv) {
  CLI::App app{"Weather-driven renewable mismatch analysis"};
  app.set_version_flag("--version", std::string(pipeline::kVersion));
  app.require_subcommand(1);

  fs::path config;
  fs::path out;
  std::uint64_t seed = 7;
  synth::SynthSpec spec;
  std::vector<fs::path> run_dirs;

  auto* validate = app.add_subcommand("validate", "Check a run config and every file it references");
  validate->add_option("--config", config, "Run config (INI) or run manifest")->required();

  auto* run = app.add_subcommand("run", "Execute the full analysis");
  run->add_option("--config", config, "Run config (INI) or run manifest to re-execute")->required();
  run->add_option("--out", out, "Output directory (overrides [output] directory)");

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic input bundle with its run config");
  synth_cmd->add_option("--out", out, "Bundle directory")->required();
  synth_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--countries", spec.n_countries, "Number of countries (1-30)")->capture_default_str();
  synth_cmd->add_option("--cells-per-country", spec.cells_per_country)->capture_default_str();
  synth_cmd->add_option("--years", spec.years, "Years per scenario")->capture_default_str();
  synth_cmd->add_option("--warming-offset", spec.scenarios.back().warming_offset,
                        "Linear warming across the last scenario, degC")
      ->capture_default_str();

  auto* compare = app.add_subcommand("compare", "Compare completed run directories across models");
  compare->add_option("runs", run_dirs, "Run directories")->required()->expected(2, -1);
  compare->add_option("--out", out, "Output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const auto findings = pipeline::validate(config);
      for (const auto& f : findings) std::cout << pipeline::to_string(f) << "\n";
      std::cout << findings.size() << " finding(s)\n";
      return findings.empty() ? 0 : 1;
    }
    if (*run) {
      const auto result = pipeline::run(config, out);
      std::cout << "wrote " << result.reports.size() << " files to " << result.output_directory.string() << "\n";
      return 0;
    }
    if (*synth_cmd) {
      spec.seed = seed;
      const auto path = synth::write_bundle(spec, out);
      std::cout << "wrote bundle; config at " << path.string() << "\n";
      return 0;
    }
    if (*compare) {
      pipeline::compare(run_dirs, out);
      std::cout << "wrote " << out.string() << "\n";
      return 0;
    }
  } catch (const pipeline::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
