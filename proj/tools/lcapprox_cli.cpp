// Command-line front end: `run <config.json>` and `verify [matrix.json]`.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lcapprox/error.hpp"
#include "lcapprox/harness.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;

void print_result(const lcapprox::ExperimentResult& r, std::ostream& os) {
  if (r.config_error) {
    os << "ERROR " << r.name << ": " << *r.config_error << "\n";
    return;
  }
  os << (r.passed() ? "PASS  " : "FAIL  ") << r.name << "\n";
  for (const auto& c : r.contracts) {
    if (!c.passed) os << "      violated " << c.name << " (" << c.detail << ")\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate identities and finite-rank approximants on locally compact groups"};
  app.set_version_flag("--version", std::string(lcapprox::kVersion));

  std::string output_dir;
  int jobs = 1;
  double tolerance_scale = 1.0;
  std::optional<int> modular_hook;
  app.add_option("--output-dir", output_dir,
                 "Directory for CSV, plot and metadata files (default: $" +
                     std::string(lcapprox::kOutputDirEnv) + " or ./out)");
  app.add_option("--jobs", jobs, "Experiments run concurrently by verify")->check(CLI::PositiveNumber);
  app.add_option("--tolerance-scale", tolerance_scale, "Multiplies every contract tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--test-modular-exponent", modular_hook,
                 "Test hook: replace the affine modular exponent in every experiment")
      ->group("");
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();

  std::string matrix_path;
  auto* verify = app.add_subcommand("verify", "Run a verification matrix (built-in when omitted)");
  verify->add_option("matrix", matrix_path, "Matrix file (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  if (output_dir.empty()) {
    const char* env = std::getenv(std::string(lcapprox::kOutputDirEnv).c_str());
    output_dir = env && *env ? env : "out";
  }
  const lcapprox::Tolerances tol = lcapprox::Tolerances{}.scaled(tolerance_scale);

  if (run->parsed()) {
    lcapprox::ExperimentConfig config;
    try {
      config = lcapprox::load_config(config_path);
    } catch (const lcapprox::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfig;
    }
    if (modular_hook) config.modular_exponent = modular_hook;
    const auto result = lcapprox::run_experiment(config, tol);
    if (result.config_error) {
      print_result(result, std::cerr);
      return kExitConfig;
    }
    try {
      lcapprox::write_outputs(result, output_dir);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitViolation;
    }
    print_result(result, std::cout);
    return result.passed() ? kExitPass : kExitViolation;
  }

  std::vector<lcapprox::ExperimentConfig> configs;
  try {
    configs = matrix_path.empty() ? lcapprox::builtin_matrix() : lcapprox::load_matrix(matrix_path);
  } catch (const lcapprox::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  lcapprox::VerifyOptions options;
  options.output_dir = output_dir;
  options.jobs = jobs;
  options.tolerance_scale = tolerance_scale;
  options.modular_exponent = modular_hook;
  const auto summary = lcapprox::verify(std::move(configs), options);

  std::filesystem::create_directories(output_dir);
  const auto report = summary.to_json();
  std::ofstream(std::filesystem::path(output_dir) / "summary.json", std::ios::binary) << report.dump(2) << "\n";
  bool config_errors = false;
  for (const auto& r : summary.results) {
    print_result(r, std::cout);
    config_errors = config_errors || r.config_error.has_value();
  }
  std::cout << report["passed"].get<std::size_t>() << "/" << report["total"].get<std::size_t>()
            << " experiments passed\n";
  if (config_errors) return kExitConfig;
  return summary.passed() ? kExitPass : kExitViolation;
}
