// Acceptance gate: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exit status is nonzero if any fails.
//
// Usage: optaccel_acceptance [--report-dir DIR]

#include "optaccel/experiment.hpp"
#include "optaccel/verify.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

namespace fs = std::filesystem;
using namespace optaccel;

namespace {

// Runtime budget per criterion, seconds.
const std::map<int, double> kBudget{{1, 60},  {2, 60},  {3, 60},  {4, 120}, {5, 600},
                                    {6, 1200}, {7, 600}, {8, 600}, {9, 300}};

// Suites in criterion order.
const char* const kSuites[] = {"assumptions", "lemma3", "lemma1", "rate_convex",
                               "speedup",     "rate_restart", "sigma_star"};

bool reproducible_experiment(std::string& detail) {
  ExperimentSpec s;
  s.name = "acceptance-repro";
  s.problems = {ProblemConfig{"interpolation_least_squares",
                              {{"d", 32}, {"n_atoms", 16}, {"H", 1.0}, {"B", 1.0}}, 0},
                ProblemConfig{"growth",
                              {{"d", 6}, {"rank", 3}, {"lambda", 0.25}, {"H", 1.0}, {"Delta", 1.0}}, 0}};
  s.b_grid = {1, 8};
  s.T_grid = {64, 256};
  s.seed_count = 4;
  s.eps = {1e-2};
  s.output_dir = "unused";
  const fs::path base = fs::temp_directory_path() / "optaccel_acceptance";
  fs::remove_all(base);
  const Manifest a = run_experiment(s, {base / "a", 1});
  const Manifest b = run_experiment(s, {base / "b", 1});
  const Manifest c = run_experiment(s, {base / "c", 2});
  s.algorithm = Algorithm::restarted;
  s.T_grid.clear();
  s.problems.erase(s.problems.begin());
  const Manifest r1 = run_experiment(s, {base / "r1", 1});
  const Manifest r2 = run_experiment(s, {base / "r2", 2});
  fs::remove_all(base);
  detail = "experiment digest " + a.digest().substr(0, 12) + ", restarted digest " +
           r1.digest().substr(0, 12);
  return a.digest() == b.digest() && a.digest() == c.digest() && r1.digest() == r2.digest() &&
         a.failures.empty() && r1.failures.empty();
}

}  // namespace

int main(int argc, char** argv) {
  fs::path report_dir;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--report-dir") == 0 && i + 1 < argc) report_dir = argv[++i];
  }
  if (!report_dir.empty()) fs::create_directories(report_dir);

  bool all = true;
  bool hashes_match = true;
  std::string hash_detail;
  for (const char* name : kSuites) {
    SuiteReport rep;
    try {
      rep = run_suite(name);
    } catch (const std::exception& e) {
      std::printf("FAIL suite %s: %s\n", name, e.what());
      all = false;
      continue;
    }
    for (const CriterionResult& c : rep.criteria) {
      const double budget = kBudget.at(c.id);
      const bool in_time = rep.runtime_seconds <= budget;
      const bool ok = c.passed && in_time;
      all = all && ok;
      std::printf("%s criterion %d: %s (suite %s, %.2fs of %.0fs)\n", ok ? "PASS" : "FAIL", c.id,
                  c.name.c_str(), name, rep.runtime_seconds, budget);
    }
    if (!report_dir.empty())
      std::ofstream(report_dir / (std::string(name) + ".json")) << rep.to_json().dump(2) << '\n';

    const SuiteReport again = run_suite(name);
    if (again.content_hash() != rep.content_hash()) {
      hashes_match = false;
      hash_detail += std::string(" ") + name;
    }
  }

  std::string detail;
  bool repro = false;
  try {
    repro = reproducible_experiment(detail);
  } catch (const std::exception& e) {
    detail = e.what();
  }
  const bool c10 = hashes_match && repro;
  all = all && c10;
  std::printf("%s criterion 10: identical content hashes on rerun (%s%s%s)\n", c10 ? "PASS" : "FAIL",
              hashes_match ? "all suite hashes match" : "suite hash mismatch:",
              hash_detail.c_str(), ("; " + detail).c_str());
  std::printf("%s\n", all ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED");
  return all ? 0 : 1;
}
