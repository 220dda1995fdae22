#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lcapprox/group.hpp"
#include "lcapprox/mollifier.hpp"
#include "lcapprox/quadrature.hpp"

namespace lcapprox {

inline constexpr std::string_view kVersion = "0.3.0";
inline constexpr std::string_view kOutputDirEnv = "LCAPPROX_OUTPUT_DIR";

/// Contract thresholds. Everything except the rejection thresholds is
/// multiplied by the tolerance scale.
struct Tolerances {
  double step1 = 1e-9;              ///< sup_error <= modulus + step1
  double monotone_slack = 1e-12;    ///< non-increasing columns
  double forms_unimodular = 1e-8;
  double forms_affine = 1e-6;
  double step2 = 1e-8;              ///< uniform bound and output equicontinuity
  double full_rank = 1e-10;
  double rank_bound = 1e-10;        ///< sup_error <= certified bound + rank_bound
  double calibration_accept = 1e-6;
  double calibration_reject = 1e-2;  ///< not scaled
  double mollifier_mass = 1e-10;

  Tolerances scaled(double factor) const;
  nlohmann::ordered_json to_json() const;
};

enum class ExperimentKind { Calibrate, Converge, Rank, Compactness, Forms };

std::string to_string(ExperimentKind k);

struct ExperimentConfig {
  std::string name;  ///< output stem; defaults to the config file stem
  ExperimentKind experiment = ExperimentKind::Converge;
  std::string group = "real";
  std::optional<int> modular_exponent;  ///< test hook: overrides the AffinePos Δ exponent
  Profile profile = Profile::Triangular;
  double radius = 0.1;                  ///< mollifier radius for rank experiments
  std::vector<double> radii;            ///< descending
  std::vector<int> ranks;               ///< ascending
  std::optional<double> tolerance;      ///< rank: factor to tolerance instead of ranks
  std::string family = "trig";          ///< catalog name, "<name>/<member>" or "all"
  std::optional<CompactRegion> region;  ///< K; catalog default when absent
  int grid = 0;                         ///< 0 picks the per-group default
  QuadRule rule;
  std::vector<double> epsilons;         ///< compactness: ε values, ascending
  double modulus_radius = 0.0;          ///< compactness: pair radius r, 0 picks a default
  int max_doublings = 8;                ///< compactness: cap on radius-set doublings
  std::uint64_t seed = 1;
  nlohmann::ordered_json source;        ///< exact config echo

  Group make_group() const;
};

/// Parses one experiment. Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const nlohmann::ordered_json& j, std::string_view default_name);

/// Reads and parses a config file; parse errors carry line and column.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Named real columns, one row per sweep entry.
struct Table {
  std::string suffix;  ///< "" for <output>.csv, otherwise <output>.<suffix>.csv
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Contract {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ExperimentResult {
  std::string name;
  std::vector<Table> tables;
  std::vector<Contract> contracts;
  nlohmann::ordered_json metadata;
  std::optional<std::string> config_error;

  bool passed() const;
};

/// Executes one experiment; contract violations are recorded, not thrown.
ExperimentResult run_experiment(const ExperimentConfig& config, const Tolerances& tol);

/// 17 significant digits, ',' delimiter, LF line endings.
std::string format_csv(const Table& table);

/// Writes <stem>.csv (+ extra tables), <stem>.plot and <stem>.meta.json.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

struct VerifyOptions {
  std::filesystem::path output_dir = "out";
  int jobs = 1;
  double tolerance_scale = 1.0;
  std::optional<int> modular_exponent;  ///< test hook applied to every affine experiment
};

struct VerifySummary {
  std::vector<ExperimentResult> results;  ///< ordered by experiment name
  bool passed() const;
  nlohmann::ordered_json to_json() const;
};

/// The built-in matrix: every group x profile x experiment.
std::vector<ExperimentConfig> builtin_matrix();

/// Matrix file: {"experiments": [<config object> | "<config path>", ...]}.
std::vector<ExperimentConfig> load_matrix(const std::filesystem::path& path);

/// Runs the configs concurrently; never throws on a single failure.
VerifySummary verify(std::vector<ExperimentConfig> configs, const VerifyOptions& options);

}  // namespace lcapprox
