#include "optaccel/experiment.hpp"
#include "optaccel/families.hpp"
#include "optaccel/hashing.hpp"
#include "optaccel/plotdata.hpp"
#include "optaccel/trace.hpp"
#include "optaccel/verify.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace optaccel;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("optaccel_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentSpec minimal_spec(const fs::path& out) {
  ExperimentSpec s;
  s.name = "minimal";
  s.problems = {ProblemConfig{"interpolation_least_squares",
                              {{"d", 8}, {"n_atoms", 4}, {"H", 1.0}, {"B", 1.0}}, 0}};
  s.b_grid = {2};
  s.T_grid = {32};
  s.seed_count = 1;
  s.output_dir = out.string();
  return s;
}

ConfigError parse_error(const std::string& text) {
  try {
    parse_spec(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "expected ConfigError";
  return ConfigError("", "");
}

const char* kValid = R"({
  "problems": [{"family": "growth", "params": {"d": 6, "rank": 3, "lambda": 0.1, "H": 1, "Delta": 1}}],
  "algorithm": "acc_mb_sgd",
  "b_grid": [1, 2],
  "T_grid": [8],
  "seeds": {"count": 2},
  "output_dir": "x"
})";

}  // namespace

TEST(Spec, SaveLoadRoundTripIsByteIdentical) {
  const fs::path dir = scratch("roundtrip");
  const ExperimentSpec s = minimal_spec(dir / "out");
  save_spec(s, dir / "a.json");
  const ExperimentSpec loaded = load_spec(dir / "a.json");
  EXPECT_EQ(loaded, s);
  save_spec(loaded, dir / "b.json");
  EXPECT_EQ(read_file(dir / "a.json"), read_file(dir / "b.json"));
  EXPECT_EQ(spec_hash(loaded), spec_hash(s));
}

TEST(Spec, DefaultsFilledIn) {
  const ExperimentSpec s = parse_spec(kValid);
  EXPECT_EQ(s.name, "experiment");
  EXPECT_EQ(s.seed_base, 0u);
  EXPECT_EQ(s.trace_stride, 1);
  EXPECT_EQ(s.workers, 1);
  EXPECT_FALSE(s.overrides.B.has_value());
}

TEST(Spec, EmptyGridRejected) {
  std::string text = kValid;
  text.replace(text.find("[1, 2]"), 6, "[]");
  const ConfigError e = parse_error(text);
  EXPECT_EQ(e.field(), "b_grid");
  EXPECT_NE(std::string(e.what()).find("empty grid"), std::string::npos);
}

TEST(Spec, UnknownKeyRejected) {
  std::string text = kValid;
  text.replace(text.find("\"output_dir\""), 12, "\"colour\": 1, \"output_dir\"");
  EXPECT_EQ(parse_error(text).field(), "colour");
}

TEST(Spec, ParseErrorReportsLineAndColumn) {
  const ConfigError e = parse_error("{\n  \"name\": \"x\",\n  \"b_grid\": [1,, 2]\n}");
  const std::string msg = e.what();
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(Spec, ValidationNamesOffendingField) {
  std::string text = kValid;
  text.replace(text.find("\"count\": 2"), 10, "\"count\": 0");
  EXPECT_EQ(parse_error(text).field(), "seeds.count");

  text = kValid;
  text.replace(text.find("\"growth\""), 8, "\"nosuch\"");
  EXPECT_EQ(parse_error(text).field(), "problems[0].problem.family");

  text = kValid;
  text.replace(text.find("acc_mb_sgd"), 10, "restarted");
  EXPECT_EQ(parse_error(text).field(), "T_grid");

  text = kValid;
  text.replace(text.find("[8]"), 3, "[8, 8]");
  EXPECT_EQ(parse_error(text).field(), "T_grid[1]");
}

TEST(Spec, ShippedSweepMatchesGoldenHash) {
  const fs::path root = OPTACCEL_SOURCE_DIR;
  const ExperimentSpec s = load_spec(root / "configs" / "interpolation_sweep.json");
  EXPECT_EQ(s.problems.size(), 2u);
  EXPECT_EQ(s.b_grid.size(), 3u);
  EXPECT_EQ(s.T_grid.size(), 4u);
  EXPECT_EQ(s.seed_count, 20);
  std::string golden = read_file(root / "tests" / "golden" / "interpolation_sweep.sha256");
  golden.erase(golden.find_last_not_of(" \n\r\t") + 1);
  EXPECT_EQ(spec_hash(s), golden);
}

TEST(Workers, EnvironmentOverride) {
  ExperimentSpec s = minimal_spec("unused");
  s.workers = 4;
  unsetenv("OPTACCEL_WORKERS");
  EXPECT_EQ(effective_workers(s), 4);
  setenv("OPTACCEL_WORKERS", "3", 1);
  EXPECT_EQ(effective_workers(s), 3);
  setenv("OPTACCEL_WORKERS", "zero", 1);
  EXPECT_THROW(effective_workers(s), ConfigError);
  unsetenv("OPTACCEL_WORKERS");
}

TEST(RunExperiment, SingleCellWritesTraceHeaderAndSummary) {
  const fs::path out = scratch("single");
  const Manifest m = run_experiment(minimal_spec(out));
  ASSERT_EQ(m.files.size(), 3u);
  EXPECT_EQ(m.files[0].path, "cells/p0_b2_T32_s0.header.json");
  EXPECT_EQ(m.files[1].path, "cells/p0_b2_T32_s0.trace.csv");
  EXPECT_EQ(m.files[2].path, "summary.csv");
  EXPECT_TRUE(m.failures.empty());
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  for (const auto& f : m.files) EXPECT_EQ(sha256_hex(read_file(out / f.path)), f.sha256);

  std::ifstream trace(out / m.files[1].path);
  const auto records = read_trace_csv(trace);
  EXPECT_EQ(records.size(), 32u);
  const nlohmann::json header = nlohmann::json::parse(read_file(out / m.files[0].path));
  EXPECT_EQ(header.at("problem_hash"), config_hash(minimal_spec(out).problems[0]));
  EXPECT_EQ(header.at("b"), 2);
}

TEST(RunExperiment, RerunAndWorkerCountReproduceHashes) {
  ExperimentSpec s = minimal_spec("unused");
  s.problems.push_back(ProblemConfig{"sign_vector", {{"n", 2}, {"H", 1.0}, {"B", 1.0}, {"signs", {1, -1, 1, 1}}}, 0});
  s.b_grid = {1, 4};
  s.T_grid = {16, 64};
  s.seed_count = 3;
  s.eps = {1e-2};
  const Manifest a = run_experiment(s, {scratch("w1a"), 1});
  const Manifest b = run_experiment(s, {scratch("w1b"), 1});
  const Manifest c = run_experiment(s, {scratch("w2"), 2});
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_EQ(a.digest(), c.digest());
  EXPECT_EQ(a.files.size(), 2u * 2 * 2 * 3 * 2 + 2);
}

TEST(RunExperiment, SgdTunesStepsizeAndRecordsGrid) {
  ExperimentSpec s = minimal_spec("unused");
  s.algorithm = Algorithm::sgd;
  s.seed_count = 3;
  s.sgd_eta_grid = {0.5, 0.05};
  const fs::path out = scratch("sgd");
  const Manifest m = run_experiment(s, {out, 1});
  const nlohmann::json header = nlohmann::json::parse(read_file(out / "cells/p0_b2_T32_s0.header.json"));
  EXPECT_EQ(header.at("algorithm"), "sgd");
  EXPECT_EQ(header.at("extra").at("eta_grid").size(), 2u);
  EXPECT_EQ(header.at("gamma"), 0.5);
  EXPECT_TRUE(m.failures.empty());
}

TEST(RunExperiment, FailedCellsAreRecordedNotFatal) {
  ExperimentSpec s = minimal_spec("unused");
  s.problems = {ProblemConfig{"growth", {{"d", 6}, {"rank", 3}, {"lambda", 0.25}, {"H", 1.0}, {"Delta", 1.0}}, 0}};
  s.algorithm = Algorithm::restarted;
  s.T_grid.clear();
  s.eps = {5.0};  // above Delta: empty plan
  const Manifest m = run_experiment(s, {scratch("fail"), 1});
  ASSERT_EQ(m.failures.size(), 1u);
  EXPECT_NE(m.failures[0].reason.find("empty stage plan"), std::string::npos);
  EXPECT_EQ(m.files.size(), 2u);  // summary + speedup
}

TEST(PlotData, RateCurveOneRowPerHorizon) {
  ExperimentSpec s = minimal_spec("unused");
  s.T_grid = {8, 16, 32};
  const fs::path out = scratch("rate");
  run_experiment(s, {out, 1});
  const std::string csv = emit_plotdata("rate_curve", {out / "summary.csv"});
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "source,problem,problem_hash,algorithm,b,T,median,q1,q3");
  std::vector<std::string> Ts;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    Ts.push_back(cells.at(5));
  }
  EXPECT_EQ(Ts, (std::vector<std::string>{"8", "16", "32"}));
}

TEST(PlotData, SpeedupCurvePreservesBatchOrder) {
  ExperimentSpec s = minimal_spec("unused");
  s.b_grid = {16, 1, 4};
  s.T_grid = {16, 64, 256};
  s.seed_count = 2;
  s.eps = {0.01};
  const fs::path out = scratch("speed");
  run_experiment(s, {out, 1});
  const std::string csv = emit_plotdata("speedup_curve", {out / "speedup.csv"});
  const auto p1 = csv.find(",0.01,1,");
  const auto p4 = csv.find(",0.01,4,");
  const auto p16 = csv.find(",0.01,16,");
  ASSERT_NE(p1, std::string::npos);
  EXPECT_LT(p1, p4);
  EXPECT_LT(p4, p16);
}

TEST(PlotData, StageDecayMatchesTraceStageMarkers) {
  ExperimentSpec s = minimal_spec("unused");
  s.problems = {ProblemConfig{"growth", {{"d", 6}, {"rank", 3}, {"lambda", 0.25}, {"H", 1.0}, {"Delta", 1.0}}, 0}};
  s.algorithm = Algorithm::restarted;
  s.T_grid.clear();
  s.b_grid = {8};
  s.eps = {std::exp(-3.0)};
  const fs::path out = scratch("stage");
  const Manifest m = run_experiment(s, {out, 1});
  ASSERT_TRUE(m.failures.empty());
  fs::path trace_path;
  for (const auto& f : m.files)
    if (f.path.find(".trace.csv") != std::string::npos) trace_path = out / f.path;
  std::ifstream in(trace_path);
  const auto records = read_trace_csv(in);

  const std::string csv = emit_plotdata("stage_decay", {trace_path});
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "source,stage,t_end,subopt");
  int stage = 0;
  while (std::getline(is, line)) {
    ++stage;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    const std::int64_t t_end = std::stoll(cells.at(2));
    const TraceRecord& r = records.at(static_cast<std::size_t>(t_end - 1));
    EXPECT_EQ(r.stage, stage);
    EXPECT_TRUE(t_end == static_cast<std::int64_t>(records.size()) ||
                records.at(static_cast<std::size_t>(t_end)).stage == stage + 1);
    EXPECT_EQ(cells.at(3), format_double(r.subopt));
  }
  EXPECT_EQ(stage, 3);
}

TEST(PlotData, MissingInputAndUnknownKind) {
  try {
    emit_plotdata("rate_curve", {"/nonexistent/summary.csv"});
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/summary.csv"), std::string::npos);
  }
  EXPECT_THROW(emit_plotdata("histogram", {"x"}), std::invalid_argument);
}

TEST(Verify, UnknownSuiteAndReproducibleHash) {
  EXPECT_THROW(run_suite("nope"), std::invalid_argument);
  const SuiteReport a = run_suite("lemma1");
  const SuiteReport b = run_suite("lemma1");
  EXPECT_TRUE(a.passed());
  EXPECT_EQ(a.content_hash(), b.content_hash());
  EXPECT_FALSE(a.content().contains("runtime_seconds"));
}

TEST(Verify, EighthOctaveGrid) {
  const auto g = eighth_octave_grid(64);
  EXPECT_EQ(g.front(), 1);
  EXPECT_EQ(g.back(), 64);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_LT(g[i - 1], g[i]);
  EXPECT_NE(std::find(g.begin(), g.end(), 27), g.end());
}
