#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace optaccel {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> grid;
};

/// Unweighted least squares of log(value) on log(T). Needs >= 4 points with
/// positive T and value.
RateFit fit_rate(const std::vector<std::pair<double, double>>& grid);

/// Unweighted least squares of log(value) on T.
RateFit fit_log_linear(const std::vector<std::pair<double, double>>& grid);

/// Linear-interpolation quantile (R type 7), q in [0, 1]. Throws on empty input.
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

struct Summary {
  std::size_t count = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Summary summarize(const std::vector<double>& values);

/// Final suboptimality of one (b, T, seed) run.
struct RunOutcome {
  std::int64_t b = 0;
  std::int64_t T = 0;
  std::uint64_t seed = 0;
  double subopt = 0.0;
};

struct SpeedupRow {
  std::int64_t b = 0;
  /// False when no outcome carries this b.
  bool has_data = false;
  /// Smallest grid T whose median suboptimality is <= eps; empty if none.
  std::optional<std::int64_t> T_to_eps;
};

struct SpeedupTable {
  double eps = 0.0;
  std::string problem_hash;
  std::size_t seeds = 0;
  std::vector<SpeedupRow> rows;
};

/// One row per requested b, in the given order.
SpeedupTable time_to_eps(const std::vector<RunOutcome>& outcomes, double eps,
                         const std::vector<std::int64_t>& b_values,
                         const std::string& problem_hash = {});

/// Smallest b whose T_to_eps is within a factor `plateau` of every larger b's
/// T_to_eps, provided at least one larger b reached eps. nullopt means no
/// plateau inside the table. Throws std::invalid_argument with fewer than 4
/// distinct b values carrying data.
std::optional<std::int64_t> critical_batch(const SpeedupTable& table, double plateau = 0.8);

}  // namespace optaccel
