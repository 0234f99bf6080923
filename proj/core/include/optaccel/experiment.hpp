#pragma once

#include "optaccel/problem.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace optaccel {

enum class Algorithm { acc_mb_sgd, sgd, restarted };

std::string to_string(Algorithm a);
/// Throws ConfigError("algorithm") for unknown names.
Algorithm parse_algorithm(const std::string& name);

struct SpecOverrides {
  std::optional<double> Lstar;
  std::optional<double> B;
  std::optional<double> theta;
  std::optional<double> sigma_star_sq;

  friend bool operator==(const SpecOverrides&, const SpecOverrides&) = default;
};

/// Declarative sweep over problems x b x T x seeds. For `restarted` the stage
/// plan fixes each run's length, so T_grid is empty and the target is min(eps).
struct ExperimentSpec {
  std::string name = "experiment";
  std::vector<ProblemConfig> problems;
  Algorithm algorithm = Algorithm::acc_mb_sgd;
  std::vector<std::int64_t> b_grid;
  std::vector<std::int64_t> T_grid;
  std::int64_t seed_count = 1;
  std::uint64_t seed_base = 0;
  std::vector<double> eps;
  std::string output_dir;
  SpecOverrides overrides;
  /// Candidate SGD stepsizes; empty means {1/2, 1/4, 1/8, 1/16} / H per problem.
  std::vector<double> sgd_eta_grid;
  std::int64_t trace_stride = 1;
  std::int64_t workers = 1;

  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

nlohmann::json spec_to_json(const ExperimentSpec& spec);
/// Strict: unknown keys are rejected and every field is validated.
ExperimentSpec spec_from_json(const nlohmann::json& j);
/// Parses JSON text; syntax errors report line and column.
ExperimentSpec parse_spec(const std::string& text);
ExperimentSpec load_spec(const std::filesystem::path& path);
void save_spec(const ExperimentSpec& spec, const std::filesystem::path& path);
/// Canonical text written by save_spec.
std::string spec_text(const ExperimentSpec& spec);
/// Hex SHA-256 of the canonical compact JSON form.
std::string spec_hash(const ExperimentSpec& spec);
/// Semantic checks (grids, seeds, families). Throws ConfigError naming the field.
void validate_spec(const ExperimentSpec& spec);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct CellFailure {
  std::string cell;
  std::string reason;
};

struct Manifest {
  std::string spec_hash;
  std::string created_at;
  std::vector<ManifestEntry> files;
  std::vector<CellFailure> failures;

  /// Hash over spec hash, file hashes and failures; the timestamp is excluded.
  std::string digest() const;
  nlohmann::json to_json() const;
};

struct RunExperimentOptions {
  /// Replaces spec.output_dir when set.
  std::optional<std::filesystem::path> output_dir;
  /// Replaces the worker count (after OPTACCEL_WORKERS) when set.
  std::optional<std::int64_t> workers;
};

/// Worker count after applying OPTACCEL_WORKERS.
std::int64_t effective_workers(const ExperimentSpec& spec);

/// Runs every cell, writes per-cell trace CSV and header JSON, summary.csv,
/// speedup.csv (when eps is non-empty) and manifest.json.
Manifest run_experiment(const ExperimentSpec& spec, const RunExperimentOptions& options = {});

}  // namespace optaccel
