#pragma once

#include "optaccel/problem.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace optaccel {

/// One row of a run trace. `t` counts completed steps (cumulative across
/// restart stages); `stage` is 0 for single-stage runs and 1-based otherwise.
struct TraceRecord {
  std::int64_t t = 0;
  double norm_w = 0.0;
  double norm_wag = 0.0;
  double subopt = 0.0;
  double subopt_stderr = 0.0;
  double grad_noise_sq = 0.0;
  int stage = 0;
};

struct RunHeader {
  ProblemConfig problem;
  std::string problem_hash;
  std::string algorithm;
  std::int64_t b = 0;
  std::int64_t T = 0;
  std::uint64_t seed = 0;
  double gamma = 0.0;
  std::string schedule_hash;
  /// Algorithm-specific extras (stage plan, SGD stepsize).
  nlohmann::json extra = nlohmann::json::object();
};

struct RunTrace {
  RunHeader header;
  std::vector<TraceRecord> records;
  bool aborted = false;
  std::string abort_reason;

  /// Suboptimality of the last record; +inf for an empty or aborted trace.
  double final_subopt() const;
};

inline constexpr const char* kTraceCsvHeader =
    "t,norm_w,norm_wag,subopt,subopt_stderr,grad_noise_sq,stage";

void write_trace_csv(std::ostream& out, const RunTrace& trace);
std::string trace_csv(const RunTrace& trace);
/// Parses the CSV body written by write_trace_csv. Throws std::runtime_error.
std::vector<TraceRecord> read_trace_csv(std::istream& in);

nlohmann::json header_json(const RunTrace& trace);

/// Shortest decimal form that round-trips the double.
std::string format_double(double v);

}  // namespace optaccel
