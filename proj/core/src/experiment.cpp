#include "optaccel/experiment.hpp"

#include "optaccel/families.hpp"
#include "optaccel/hashing.hpp"
#include "optaccel/optimizers.hpp"
#include "optaccel/parallel.hpp"
#include "optaccel/rates.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace optaccel {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::acc_mb_sgd: return "acc_mb_sgd";
    case Algorithm::sgd: return "sgd";
    case Algorithm::restarted: return "restarted";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "acc_mb_sgd") return Algorithm::acc_mb_sgd;
  if (name == "sgd") return Algorithm::sgd;
  if (name == "restarted") return Algorithm::restarted;
  throw ConfigError("algorithm", "unknown algorithm '" + name + "'");
}

// ---------------------------------------------------------------- spec I/O

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
      throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
  }
}

const json& required(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(key, "missing required field");
  return j.at(key);
}

std::vector<std::int64_t> int_list(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "expected an array of integers");
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer())
      throw ConfigError(field + "[" + std::to_string(i) + "]", "expected an integer");
    out.push_back(j[i].get<std::int64_t>());
  }
  return out;
}

std::vector<double> number_list(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw ConfigError(field + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

std::int64_t integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
  return j.get<std::int64_t>();
}

std::optional<double> nullable_number(const json& j, const char* key, const std::string& field) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number()) throw ConfigError(field, "expected a number or null");
  return j.at(key).get<double>();
}

template <class T>
void check_grid(const std::vector<T>& grid, const std::string& field, bool allow_empty) {
  if (grid.empty() && !allow_empty) throw ConfigError(field, "empty grid");
  std::set<T> seen;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!seen.insert(grid[i]).second)
      throw ConfigError(field + "[" + std::to_string(i) + "]", "duplicate value");
  }
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

json spec_to_json(const ExperimentSpec& s) {
  json problems = json::array();
  for (const ProblemConfig& p : s.problems) problems.push_back(p);
  return json{{"name", s.name},
              {"problems", problems},
              {"algorithm", to_string(s.algorithm)},
              {"b_grid", s.b_grid},
              {"T_grid", s.T_grid},
              {"seeds", {{"count", s.seed_count}, {"base", s.seed_base}}},
              {"eps", s.eps},
              {"output_dir", s.output_dir},
              {"overrides",
               {{"Lstar", optional_json(s.overrides.Lstar)},
                {"B", optional_json(s.overrides.B)},
                {"theta", optional_json(s.overrides.theta)},
                {"sigma_star_sq", optional_json(s.overrides.sigma_star_sq)}}},
              {"sgd_eta_grid", s.sgd_eta_grid},
              {"trace_stride", s.trace_stride},
              {"workers", s.workers}};
}

ExperimentSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("", "spec must be a JSON object");
  reject_unknown(j, "",
                 {"name", "problems", "algorithm", "b_grid", "T_grid", "seeds", "eps",
                  "output_dir", "overrides", "sgd_eta_grid", "trace_stride", "workers"});
  ExperimentSpec s;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw ConfigError("name", "expected a string");
    s.name = j.at("name").get<std::string>();
  }

  const json& problems = required(j, "problems");
  if (!problems.is_array()) throw ConfigError("problems", "expected an array");
  for (std::size_t i = 0; i < problems.size(); ++i) {
    try {
      s.problems.push_back(problems[i].get<ProblemConfig>());
    } catch (const ConfigError& e) {
      throw ConfigError("problems[" + std::to_string(i) + "]." + e.field(), e.what());
    }
  }

  const json& algorithm = required(j, "algorithm");
  if (!algorithm.is_string()) throw ConfigError("algorithm", "expected a string");
  s.algorithm = parse_algorithm(algorithm.get<std::string>());

  s.b_grid = int_list(required(j, "b_grid"), "b_grid");
  if (j.contains("T_grid")) s.T_grid = int_list(j.at("T_grid"), "T_grid");

  const json& seeds = required(j, "seeds");
  if (!seeds.is_object()) throw ConfigError("seeds", "expected an object");
  reject_unknown(seeds, "seeds", {"count", "base"});
  if (!seeds.contains("count")) throw ConfigError("seeds.count", "missing required field");
  s.seed_count = integer(seeds.at("count"), "seeds.count");
  if (seeds.contains("base")) {
    if (!seeds.at("base").is_number_unsigned())
      throw ConfigError("seeds.base", "expected a non-negative integer");
    s.seed_base = seeds.at("base").get<std::uint64_t>();
  }

  if (j.contains("eps")) s.eps = number_list(j.at("eps"), "eps");

  const json& out = required(j, "output_dir");
  if (!out.is_string()) throw ConfigError("output_dir", "expected a string");
  s.output_dir = out.get<std::string>();

  if (j.contains("overrides")) {
    const json& o = j.at("overrides");
    if (!o.is_object()) throw ConfigError("overrides", "expected an object");
    reject_unknown(o, "overrides", {"Lstar", "B", "theta", "sigma_star_sq"});
    s.overrides.Lstar = nullable_number(o, "Lstar", "overrides.Lstar");
    s.overrides.B = nullable_number(o, "B", "overrides.B");
    s.overrides.theta = nullable_number(o, "theta", "overrides.theta");
    s.overrides.sigma_star_sq = nullable_number(o, "sigma_star_sq", "overrides.sigma_star_sq");
  }
  if (j.contains("sgd_eta_grid")) s.sgd_eta_grid = number_list(j.at("sgd_eta_grid"), "sgd_eta_grid");
  if (j.contains("trace_stride")) s.trace_stride = integer(j.at("trace_stride"), "trace_stride");
  if (j.contains("workers")) s.workers = integer(j.at("workers"), "workers");

  validate_spec(s);
  return s;
}

void validate_spec(const ExperimentSpec& s) {
  if (s.problems.empty()) throw ConfigError("problems", "empty list");
  check_grid(s.b_grid, "b_grid", false);
  for (std::size_t i = 0; i < s.b_grid.size(); ++i)
    if (s.b_grid[i] < 1) throw ConfigError("b_grid[" + std::to_string(i) + "]", "must be >= 1");

  if (s.algorithm == Algorithm::restarted) {
    if (!s.T_grid.empty())
      throw ConfigError("T_grid", "must be empty for algorithm restarted (the stage plan sets T)");
    if (s.eps.empty()) throw ConfigError("eps", "restarted requires a target eps");
  } else {
    check_grid(s.T_grid, "T_grid", false);
  }
  for (std::size_t i = 0; i < s.T_grid.size(); ++i)
    if (s.T_grid[i] < 1) throw ConfigError("T_grid[" + std::to_string(i) + "]", "must be >= 1");

  if (s.seed_count < 1) throw ConfigError("seeds.count", "must be >= 1");
  for (std::size_t i = 0; i < s.eps.size(); ++i)
    if (!(s.eps[i] > 0.0)) throw ConfigError("eps[" + std::to_string(i) + "]", "must be positive");
  check_grid(s.eps, "eps", true);
  if (s.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");

  const SpecOverrides& o = s.overrides;
  if (o.Lstar && !(*o.Lstar >= 0.0)) throw ConfigError("overrides.Lstar", "must be >= 0");
  if (o.B && !(*o.B > 0.0)) throw ConfigError("overrides.B", "must be positive");
  if (o.theta && !(*o.theta > 1.0)) throw ConfigError("overrides.theta", "must be > 1");
  if (o.sigma_star_sq && !(*o.sigma_star_sq >= 0.0))
    throw ConfigError("overrides.sigma_star_sq", "must be >= 0");

  for (std::size_t i = 0; i < s.sgd_eta_grid.size(); ++i)
    if (!(s.sgd_eta_grid[i] > 0.0))
      throw ConfigError("sgd_eta_grid[" + std::to_string(i) + "]", "must be positive");
  check_grid(s.sgd_eta_grid, "sgd_eta_grid", true);
  if (s.trace_stride < 1) throw ConfigError("trace_stride", "must be >= 1");
  if (s.workers < 1) throw ConfigError("workers", "must be >= 1");

  for (std::size_t i = 0; i < s.problems.size(); ++i) {
    const std::string field = "problems[" + std::to_string(i) + "]";
    ProblemPtr p;
    try {
      p = make_problem(s.problems[i]);
    } catch (const ConfigError& e) {
      throw ConfigError(field + "." + e.field(), e.what());
    }
    if (s.algorithm == Algorithm::restarted && !(p->meta().lambda > 0.0))
      throw ConfigError(field, "restarted requires a problem with lambda > 0");
  }
}

ExperimentSpec parse_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ConfigError("", "parse error at line " + std::to_string(line) + ", column " +
                              std::to_string(col) + ": " + e.what());
  }
  return spec_from_json(j);
}

ExperimentSpec load_spec(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open spec file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

std::string spec_text(const ExperimentSpec& spec) { return spec_to_json(spec).dump(2) + "\n"; }

void save_spec(const ExperimentSpec& spec, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << spec_text(spec);
}

std::string spec_hash(const ExperimentSpec& spec) { return sha256_hex(spec_to_json(spec).dump()); }

// ---------------------------------------------------------------- manifest

std::string Manifest::digest() const {
  json j{{"spec_hash", spec_hash}, {"files", json::array()}, {"failures", json::array()}};
  for (const auto& f : files) j["files"].push_back({f.path, f.sha256, f.bytes});
  for (const auto& f : failures) j["failures"].push_back({f.cell, f.reason});
  return sha256_hex(j.dump());
}

json Manifest::to_json() const {
  json files_json = json::array();
  for (const auto& f : files)
    files_json.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  json failures_json = json::array();
  for (const auto& f : failures) failures_json.push_back({{"cell", f.cell}, {"reason", f.reason}});
  return json{{"spec_hash", spec_hash}, {"created_at", created_at}, {"files", files_json},
              {"failures", failures_json}, {"digest", digest()}};
}

std::int64_t effective_workers(const ExperimentSpec& spec) {
  if (const char* env = std::getenv("OPTACCEL_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw ConfigError("OPTACCEL_WORKERS", "expected a positive integer");
    return v;
  }
  return spec.workers;
}

// ---------------------------------------------------------------- runner

namespace {

struct Cell {
  std::size_t problem = 0;
  std::int64_t b = 0;
  std::int64_t T = 0;  // requested horizon; restarted cells use the plan total
  std::uint64_t seed = 0;
  std::string name;
  RunTrace trace;
  std::string error;
};

struct SgdJob {
  std::size_t cell = 0;
  std::size_t eta = 0;
};

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ManifestEntry write_file(const fs::path& root, const std::string& rel, const std::string& content) {
  const fs::path path = root / rel;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw std::runtime_error("write failed for " + path.string());
  return ManifestEntry{rel, sha256_hex(content), content.size()};
}

std::string cell_name(std::size_t p, std::int64_t b, std::int64_t T, std::uint64_t seed) {
  return "p" + std::to_string(p) + "_b" + std::to_string(b) + "_T" + std::to_string(T) + "_s" +
         std::to_string(seed);
}

std::vector<double> eta_grid_for(const ExperimentSpec& spec, const Problem& p) {
  if (!spec.sgd_eta_grid.empty()) return spec.sgd_eta_grid;
  const double H = p.meta().H;
  return {0.5 / H, 0.25 / H, 0.125 / H, 0.0625 / H};
}

}  // namespace

Manifest run_experiment(const ExperimentSpec& spec, const RunExperimentOptions& options) {
  validate_spec(spec);
  const fs::path root = options.output_dir.value_or(fs::path(spec.output_dir));
  const std::int64_t workers = options.workers.value_or(effective_workers(spec));
  fs::create_directories(root / "cells");

  std::vector<ProblemPtr> problems;
  for (const auto& cfg : spec.problems) problems.push_back(make_problem(cfg));

  // Restarted runs: one stage plan per (problem, b).
  std::map<std::pair<std::size_t, std::int64_t>, StagePlan> plans;
  if (spec.algorithm == Algorithm::restarted) {
    const double target = *std::min_element(spec.eps.begin(), spec.eps.end());
    const double theta = spec.overrides.theta.value_or(std::numbers::e);
    for (std::size_t p = 0; p < problems.size(); ++p) {
      const ProblemMeta& m = problems[p]->meta();
      for (const std::int64_t b : spec.b_grid) {
        plans[{p, b}] = make_stage_plan(m.Delta, target, theta, m.lambda, m.H, b,
                                        spec.overrides.Lstar.value_or(m.Lstar));
      }
    }
  }

  std::vector<Cell> cells;
  for (std::size_t p = 0; p < problems.size(); ++p) {
    for (const std::int64_t b : spec.b_grid) {
      std::vector<std::int64_t> horizons = spec.T_grid;
      if (spec.algorithm == Algorithm::restarted) horizons = {plans.at({p, b}).total_iterations()};
      for (const std::int64_t T : horizons) {
        for (std::int64_t s = 0; s < spec.seed_count; ++s) {
          Cell c;
          c.problem = p;
          c.b = b;
          c.T = T;
          c.seed = spec.seed_base + static_cast<std::uint64_t>(s);
          c.name = cell_name(p, b, T, c.seed);
          cells.push_back(std::move(c));
        }
      }
    }
  }

  const auto guarded = [](Cell& c, auto&& run) {
    try {
      run();
    } catch (const std::exception& e) {
      c.error = e.what();
    }
  };

  if (spec.algorithm == Algorithm::sgd) {
    // Every (cell, eta) pair runs; each (problem, b, T) group keeps the eta
    // with the smallest median final suboptimality.
    std::vector<std::vector<double>> etas;
    for (const auto& p : problems) etas.push_back(eta_grid_for(spec, *p));
    std::vector<SgdJob> jobs;
    for (std::size_t c = 0; c < cells.size(); ++c)
      for (std::size_t e = 0; e < etas[cells[c].problem].size(); ++e) jobs.push_back({c, e});
    std::vector<RunTrace> traces(jobs.size());
    std::vector<std::string> errors(jobs.size());
    parallel_for(static_cast<std::int64_t>(jobs.size()), workers, [&](std::int64_t k) {
      const SgdJob& job = jobs[static_cast<std::size_t>(k)];
      const Cell& c = cells[job.cell];
      try {
        SgdOptions o;
        o.eta = etas[c.problem][job.eta];
        o.B_override = spec.overrides.B;
        o.seed = c.seed;
        o.record_stride = spec.trace_stride;
        traces[static_cast<std::size_t>(k)] = run_sgd(*problems[c.problem], c.b, c.T, o).trace;
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(k)] = e.what();
      }
    });

    std::map<std::tuple<std::size_t, std::int64_t, std::int64_t>, std::vector<std::size_t>> groups;
    for (std::size_t c = 0; c < cells.size(); ++c)
      groups[{cells[c].problem, cells[c].b, cells[c].T}].push_back(c);
    std::vector<std::size_t> first_job(cells.size());
    for (std::size_t k = jobs.size(); k-- > 0;) first_job[jobs[k].cell] = k;

    for (const auto& [key, members] : groups) {
      const std::size_t n_eta = etas[std::get<0>(key)].size();
      std::size_t best = 0;
      double best_median = std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < n_eta; ++e) {
        std::vector<double> finals;
        for (const std::size_t c : members) finals.push_back(traces[first_job[c] + e].final_subopt());
        const double m = median(finals);
        if (m < best_median) {
          best_median = m;
          best = e;
        }
      }
      json grid = etas[std::get<0>(key)];
      for (const std::size_t c : members) {
        const std::size_t k = first_job[c] + best;
        cells[c].error = errors[k];
        cells[c].trace = std::move(traces[k]);
        cells[c].trace.header.extra["eta_grid"] = grid;
      }
    }
  } else {
    parallel_for(static_cast<std::int64_t>(cells.size()), workers, [&](std::int64_t k) {
      Cell& c = cells[static_cast<std::size_t>(k)];
      guarded(c, [&] {
        const Problem& problem = *problems[c.problem];
        if (spec.algorithm == Algorithm::restarted) {
          const StagePlan& plan = plans.at({c.problem, c.b});
          if (plan.stages.empty()) throw std::runtime_error("empty stage plan (eps >= Delta)");
          c.trace = run_restarted(problem, plan, c.seed, spec.trace_stride).trace;
        } else {
          RunOptions o;
          o.B_override = spec.overrides.B;
          if (spec.overrides.sigma_star_sq) {
            o.noise_sq_override = spec.overrides.sigma_star_sq;
          } else if (spec.overrides.Lstar) {
            o.noise_sq_override = 2.0 * problem.meta().H * *spec.overrides.Lstar;
          }
          o.seed = c.seed;
          o.record_stride = spec.trace_stride;
          c.trace = run_acc_mb_sgd(problem, c.b, c.T, o).trace;
        }
      });
    });
  }

  Manifest manifest;
  manifest.spec_hash = spec_hash(spec);
  manifest.created_at = utc_now();
  for (const Cell& c : cells) {
    if (!c.error.empty()) {
      manifest.failures.push_back({c.name, c.error});
      continue;
    }
    if (c.trace.aborted) manifest.failures.push_back({c.name, c.trace.abort_reason});
    json header = header_json(c.trace);
    header["cell"] = c.name;
    manifest.files.push_back(write_file(root, "cells/" + c.name + ".trace.csv", trace_csv(c.trace)));
    manifest.files.push_back(
        write_file(root, "cells/" + c.name + ".header.json", header.dump(2) + "\n"));
  }

  // Aggregates over successful cells.
  std::map<std::tuple<std::size_t, std::int64_t, std::int64_t>, std::vector<double>> finals;
  std::map<std::tuple<std::size_t, std::int64_t, std::int64_t>, std::size_t> failed;
  std::map<std::size_t, std::vector<RunOutcome>> outcomes;
  for (const Cell& c : cells) {
    const auto key = std::make_tuple(c.problem, c.b, c.T);
    finals[key];
    if (!c.error.empty() || c.trace.aborted) {
      ++failed[key];
      continue;
    }
    finals[key].push_back(c.trace.final_subopt());
    outcomes[c.problem].push_back({c.b, c.T, c.seed, c.trace.final_subopt()});
  }

  std::ostringstream summary;
  summary << "problem,problem_hash,algorithm,b,T,seeds,failed,median,q1,q3,min,max\n";
  for (const auto& [key, values] : finals) {
    const auto& [p, b, T] = key;
    summary << p << ',' << config_hash(spec.problems[p]) << ',' << to_string(spec.algorithm) << ','
            << b << ',' << T << ',' << values.size() << ',' << failed[key];
    if (values.empty()) {
      summary << ",,,,,\n";
      continue;
    }
    const Summary s = summarize(values);
    summary << ',' << format_double(s.median) << ',' << format_double(s.q1) << ','
            << format_double(s.q3) << ',' << format_double(s.min) << ',' << format_double(s.max)
            << '\n';
  }
  manifest.files.push_back(write_file(root, "summary.csv", summary.str()));

  if (!spec.eps.empty()) {
    std::ostringstream speedup;
    speedup << "problem,problem_hash,eps,b,seeds,T_to_eps\n";
    for (std::size_t p = 0; p < problems.size(); ++p) {
      const std::string hash = config_hash(spec.problems[p]);
      for (const double eps : spec.eps) {
        const SpeedupTable table = time_to_eps(outcomes[p], eps, spec.b_grid, hash);
        for (const SpeedupRow& row : table.rows) {
          speedup << p << ',' << hash << ',' << format_double(eps) << ',' << row.b << ','
                  << table.seeds << ',';
          if (row.T_to_eps) speedup << *row.T_to_eps;
          speedup << '\n';
        }
      }
    }
    manifest.files.push_back(write_file(root, "speedup.csv", speedup.str()));
  }

  std::sort(manifest.files.begin(), manifest.files.end(),
            [](const auto& a, const auto& b) { return a.path < b.path; });
  {
    std::ofstream out(root / "manifest.json", std::ios::binary);
    out << manifest.to_json().dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write manifest.json");
  }
  return manifest;
}

}  // namespace optaccel
