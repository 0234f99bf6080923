#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace optaccel {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  nlohmann::json metrics = nlohmann::json::object();
};

struct SuiteReport {
  std::string suite;
  std::vector<CriterionResult> criteria;
  double runtime_seconds = 0.0;

  bool passed() const;
  /// Report without timing; this is what content_hash covers.
  nlohmann::json content() const;
  std::string content_hash() const;
  nlohmann::json to_json() const;
  /// One "PASS|FAIL [id] name" line per criterion.
  std::string summary_text() const;
};

struct VerifyOptions {
  std::int64_t workers = 1;
  std::uint64_t seed = 0;
};

/// assumptions, lemma3, lemma1, rate_convex, rate_restart, speedup, sigma_star.
const std::vector<std::string>& suite_names();

/// Throws std::invalid_argument for an unknown suite.
SuiteReport run_suite(const std::string& name, const VerifyOptions& options = {});

/// Geometric horizon grid round(2^(k/8)) for k = 0..8*log2(T_max), deduplicated.
std::vector<std::int64_t> eighth_octave_grid(std::int64_t T_max);

}  // namespace optaccel
