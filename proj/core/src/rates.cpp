#include "optaccel/rates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace optaccel {
namespace {

RateFit least_squares(const std::vector<std::pair<double, double>>& grid, bool log_x) {
  if (grid.size() < 4) throw std::invalid_argument("rate fit: need at least 4 grid points");
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [T, v] : grid) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("rate fit: values must be positive and finite");
    if (log_x && !(T > 0.0)) throw std::invalid_argument("rate fit: T must be positive");
    xs.push_back(log_x ? std::log(T) : T);
    ys.push_back(std::log(v));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("rate fit: grid has a single distinct T");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  fit.grid = grid;
  return fit;
}

}  // namespace

RateFit fit_rate(const std::vector<std::pair<double, double>>& grid) {
  return least_squares(grid, true);
}

RateFit fit_log_linear(const std::vector<std::pair<double, double>>& grid) {
  return least_squares(grid, false);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty input");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.median = quantile(values, 0.5);
  s.q1 = quantile(values, 0.25);
  s.q3 = quantile(values, 0.75);
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  s.min = *mn;
  s.max = *mx;
  return s;
}

SpeedupTable time_to_eps(const std::vector<RunOutcome>& outcomes, double eps,
                         const std::vector<std::int64_t>& b_values,
                         const std::string& problem_hash) {
  std::map<std::int64_t, std::map<std::int64_t, std::vector<double>>> by_b;
  std::set<std::uint64_t> seeds;
  for (const RunOutcome& o : outcomes) {
    by_b[o.b][o.T].push_back(o.subopt);
    seeds.insert(o.seed);
  }
  SpeedupTable table{eps, problem_hash, seeds.size(), {}};
  for (const std::int64_t b : b_values) {
    SpeedupRow row{b, false, std::nullopt};
    if (const auto it = by_b.find(b); it != by_b.end()) {
      row.has_data = true;
      for (const auto& [T, subs] : it->second) {  // ascending T
        if (median(subs) <= eps) {
          row.T_to_eps = T;
          break;
        }
      }
    }
    table.rows.push_back(row);
  }
  return table;
}

std::optional<std::int64_t> critical_batch(const SpeedupTable& table, double plateau) {
  std::vector<SpeedupRow> rows;
  for (const SpeedupRow& r : table.rows)
    if (r.has_data) rows.push_back(r);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.b < b.b; });
  rows.erase(std::unique(rows.begin(), rows.end(),
                         [](const auto& a, const auto& b) { return a.b == b.b; }),
             rows.end());
  if (rows.size() < 4) throw std::invalid_argument("critical_batch: need at least 4 distinct b");

  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].T_to_eps) continue;
    const double base = plateau * static_cast<double>(*rows[i].T_to_eps);
    bool flat = true;
    bool has_larger = false;
    for (std::size_t j = i + 1; j < rows.size() && flat; ++j) {
      if (!rows[j].T_to_eps) continue;  // unreached counts as no further improvement
      has_larger = true;
      flat = static_cast<double>(*rows[j].T_to_eps) >= base;
    }
    if (flat && has_larger) return rows[i].b;
  }
  return std::nullopt;
}

}  // namespace optaccel
