#include "optaccel/verify.hpp"

#include "optaccel/families.hpp"
#include "optaccel/hashing.hpp"
#include "optaccel/optimizers.hpp"
#include "optaccel/oracles.hpp"
#include "optaccel/parallel.hpp"
#include "optaccel/rates.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace optaccel {

using nlohmann::json;

bool SuiteReport::passed() const {
  return !criteria.empty() &&
         std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.passed; });
}

json SuiteReport::content() const {
  json cs = json::array();
  for (const auto& c : criteria)
    cs.push_back({{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"metrics", c.metrics}});
  return json{{"suite", suite}, {"passed", passed()}, {"criteria", cs}};
}

std::string SuiteReport::content_hash() const { return sha256_hex(content().dump()); }

json SuiteReport::to_json() const {
  json j = content();
  j["content_hash"] = content_hash();
  j["runtime_seconds"] = runtime_seconds;
  return j;
}

std::string SuiteReport::summary_text() const {
  std::ostringstream os;
  for (const auto& c : criteria)
    os << (c.passed ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << '\n';
  return os.str();
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"assumptions", "lemma3",       "lemma1",    "rate_convex",
                                              "rate_restart", "speedup", "sigma_star"};
  return names;
}

std::vector<std::int64_t> eighth_octave_grid(std::int64_t T_max) {
  std::vector<std::int64_t> out;
  for (int k = 0;; ++k) {
    const auto T = static_cast<std::int64_t>(std::llround(std::exp2(k / 8.0)));
    if (T > T_max) break;
    if (out.empty() || out.back() != T) out.push_back(T);
  }
  return out;
}

namespace {

constexpr std::int64_t kSeeds = 20;

std::vector<double> acc_finals(const Problem& p, std::int64_t b, std::int64_t T,
                               const VerifyOptions& vo, const RunOptions& base = {}) {
  std::vector<double> out(kSeeds);
  parallel_for(kSeeds, vo.workers, [&](std::int64_t s) {
    RunOptions o = base;
    o.seed = vo.seed + static_cast<std::uint64_t>(s);
    o.record_stride = T;
    out[static_cast<std::size_t>(s)] = run_acc_mb_sgd(p, b, T, o).trace.final_subopt();
  });
  return out;
}

std::vector<double> sgd_finals(const Problem& p, std::int64_t b, std::int64_t T, double eta,
                               const VerifyOptions& vo) {
  std::vector<double> out(kSeeds);
  parallel_for(kSeeds, vo.workers, [&](std::int64_t s) {
    SgdOptions o;
    o.eta = eta;
    o.seed = vo.seed + static_cast<std::uint64_t>(s);
    o.record_stride = T;
    out[static_cast<std::size_t>(s)] = run_sgd(p, b, T, o).trace.final_subopt();
  });
  return out;
}

json fit_json(const RateFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
}

// Smallest grid T whose median over seeds reaches eps; scans upward and stops.
template <class MedianAt>
std::vector<RunOutcome> scan_to_eps(std::int64_t b, const std::vector<std::int64_t>& grid,
                                    double eps, MedianAt&& finals_at) {
  std::vector<RunOutcome> outcomes;
  for (const std::int64_t T : grid) {
    const std::vector<double> finals = finals_at(T);
    for (std::size_t s = 0; s < finals.size(); ++s)
      outcomes.push_back({b, T, static_cast<std::uint64_t>(s), finals[s]});
    if (median(finals) <= eps) break;
  }
  return outcomes;
}

// ---------------------------------------------------------------- suites

std::vector<ProblemPtr> builtin_instances() {
  return {
      make_interpolation_least_squares(32, 16, 1.0, 1.0, 0),
      make_interpolation_least_squares(8, 4, 2.0, 3.0, 7),
      make_sign_vector_problem(4, 1.0, 1.0, {1, -1, 1, 1, -1, -1, 1, -1}),
      make_gaussian_spike_problem(1.0, 1.0, 0.5, 1.0, 1, 0),
      make_gaussian_spike_problem(2.0, 0.5, 0.1, 0.0, -1, 0),
      make_growth_problem(6, 3, 0.1, 1.0, 1.0, 0),
      make_growth_problem(6, 3, 0.25, 1.0, 1.0, 1),
      make_noiseless_quadratic(16, 1.0, 1.0, 1e8),
  };
}

SuiteReport suite_assumptions(const VerifyOptions& vo) {
  CriterionResult c{1, "per-sample assumptions and growth on every built-in family", true, {}};
  json items = json::array();
  for (const ProblemPtr& p : builtin_instances()) {
    const AssumptionReport r = certify_assumptions(*p, 1000, vo.seed);
    const ProblemMeta& m = p->meta();
    const bool norm_ok = m.wstar->norm() <= m.B * (1.0 + 1e-12);
    const bool noise_bound_ok = m.sigma_star_sq <= 2.0 * m.H * m.Lstar * (1.0 + 1e-12);
    bool exact_ok = true;
    double exact_err = 0.0;
    if (dynamic_cast<const LeastSquaresProblem*>(p.get()) != nullptr) {
      const ExactMinimum em = exact_min(*p);
      exact_err = std::abs(em.Lstar - m.Lstar) + p->excess_loss(em.wstar);
      exact_ok = exact_err <= 1e-9;
    }
    const bool ok = r.passed && norm_ok && noise_bound_ok && exact_ok;
    c.passed = c.passed && ok;
    items.push_back({{"family", p->config().family},
                     {"params", p->config().params},
                     {"passed", ok},
                     {"nonnegativity", r.nonnegativity},
                     {"convexity", r.convexity},
                     {"smoothness", r.smoothness},
                     {"gradient_lipschitz", r.gradient_lipschitz},
                     {"growth_checked", r.growth_checked},
                     {"growth", r.growth},
                     {"wstar_within_B", norm_ok},
                     {"sigma_star_sq_within_2HLstar", noise_bound_ok},
                     {"exact_min_error", exact_err}});
  }
  c.metrics = {{"probes", 1000}, {"rel_tol", 1e-8}, {"growth_tol", 1e-10}, {"problems", items}};
  return SuiteReport{"assumptions", {c}, 0.0};
}

SuiteReport suite_lemma3(const VerifyOptions& vo) {
  CriterionResult c{2, "gradient second moment at w* within 2 H L* + 3 SE", true, {}};
  json items = json::array();
  const double H = 1.0;
  const double B = 1.0;
  const double p = 0.5;
  std::uint64_t k = 0;
  for (const double Lstar : {0.01, 0.1, 1.0}) {
    const double s = std::sqrt(2.0 * Lstar / p);
    const ProblemPtr prob = make_gaussian_spike_problem(H, B, p, s, 1, 0);
    const Estimate e = variance_at(*prob, *prob->meta().wstar, 100000, vo.seed + k++);
    const double bound = 2.0 * H * prob->meta().Lstar;
    const bool ok = e.value <= bound + 3.0 * e.std_error;
    c.passed = c.passed && ok;
    items.push_back({{"Lstar", Lstar}, {"s", s}, {"estimate", e.value}, {"std_error", e.std_error},
                     {"bound", bound}, {"passed", ok}});
  }
  c.metrics = {{"samples", 100000}, {"H", H}, {"p", p}, {"cases", items}};
  return SuiteReport{"lemma3", {c}, 0.0};
}

SuiteReport suite_lemma1(const VerifyOptions& vo) {
  CriterionResult c{3, "projection inequality on random instances", true, {}};
  const CounterRng rng(vo.seed ^ 0x1e33a1ULL);
  double worst = -std::numeric_limits<double>::infinity();
  double worst_gap = 0.0;
  std::int64_t failures = 0;
  for (std::uint64_t n = 0; n < 1000; ++n) {
    const Index d = 1 + static_cast<Index>(n % 8);
    ProjectionInstance in;
    in.B = 0.1 + 9.9 * rng.uniform(n, 0, 0);
    in.gamma = rng.uniform(n, 0, 1);
    in.w_t = uniform_in_ball(d, in.B, rng, n, 1);
    in.w_md = uniform_in_ball(d, in.B, rng, n, 2);
    in.g = uniform_in_ball(d, 1.0, rng, n, 3) * std::pow(10.0, 2.0 * rng.uniform(n, 0, 2));
    std::vector<Vector> probes;
    for (std::uint64_t q = 0; q < 100; ++q) {
      Vector w = uniform_in_ball(d, in.B, rng, n, 10 + q);
      if (q % 10 == 0 && w.norm() > 0.0) w *= in.B / w.norm();  // boundary probes
      probes.push_back(std::move(w));
    }
    const ProjectionCheck r = check_projection_lemma(in, probes);
    worst = std::max(worst, r.max_violation);
    worst_gap = std::max(worst_gap, r.equality_gap);
    if (!r.passed || r.equality_gap > 1e-12) ++failures;
  }
  c.passed = failures == 0;
  c.metrics = {{"instances", 1000}, {"probes_per_instance", 100}, {"max_violation", worst},
               {"max_equality_gap", worst_gap}, {"failed_instances", failures},
               {"violation_tol", 1e-9}, {"equality_tol", 1e-12}};
  return SuiteReport{"lemma1", {c}, 0.0};
}

SuiteReport suite_rate_convex(const VerifyOptions& vo) {
  SuiteReport rep{"rate_convex", {}, 0.0};
  {
    // Large b keeps gamma at 1/(12H) over the whole grid.
    CriterionResult c{4, "deterministic accelerated rate on a noiseless quadratic", false, {}};
    const ProblemPtr p = make_noiseless_quadratic(16, 1.0, 1.0, 1e8);
    const std::int64_t b = 16384;
    std::vector<std::pair<double, double>> grid;
    for (std::int64_t T = 32; T <= 4096; T *= 2) {
      RunOptions o;
      o.seed = vo.seed;
      o.record_stride = T;
      grid.emplace_back(static_cast<double>(T), run_acc_mb_sgd(*p, b, T, o).trace.final_subopt());
    }
    const RateFit f = fit_rate(grid);
    c.passed = f.slope <= -1.85 && f.r_squared >= 0.98;
    c.metrics = {{"b", b}, {"fit", fit_json(f)}, {"grid", grid}};
    rep.criteria.push_back(c);
  }
  {
    CriterionResult c{5, "optimistic interpolation rate at b = 1 and b = 64", true, {}};
    const ProblemPtr p = make_interpolation_least_squares(32, 16, 1.0, 1.0, 0);
    const std::map<std::int64_t, double> limits{{1, -0.9}, {64, -1.7}};
    for (const auto& [b, limit] : limits) {
      std::vector<std::pair<double, double>> grid;
      for (std::int64_t T = 64; T <= 4096; T *= 2)
        grid.emplace_back(static_cast<double>(T), median(acc_finals(*p, b, T, vo)));
      const RateFit f = fit_rate(grid);
      const bool ok = f.slope <= limit;
      c.passed = c.passed && ok;
      c.metrics["b" + std::to_string(b)] = {
          {"fit", fit_json(f)}, {"grid", grid}, {"slope_limit", limit}, {"passed", ok}};
    }
    c.metrics["seeds"] = kSeeds;
    rep.criteria.push_back(c);
  }
  return rep;
}

SuiteReport suite_rate_restart(const VerifyOptions& vo) {
  CriterionResult c{8, "restarted linear convergence under quadratic growth", false, {}};
  const ProblemPtr p = make_growth_problem(6, 3, 0.25, 1.0, 1.0, 0);
  const ProblemMeta& m = p->meta();
  const std::int64_t b = 8;
  const StagePlan plan =
      make_stage_plan(m.Delta, std::exp(-5.0) * m.Delta, std::numbers::e, m.lambda, m.H, b, m.Lstar);

  std::vector<std::int64_t> boundaries;
  std::int64_t cum = 0;
  for (const Stage& s : plan.stages) boundaries.push_back(cum += s.T);

  // subopt[stage][seed] at the end of each stage, restarted and plain.
  const std::size_t K = boundaries.size();
  std::vector<std::vector<double>> restarted(K, std::vector<double>(kSeeds));
  std::vector<std::vector<double>> plain(K, std::vector<double>(kSeeds));
  parallel_for(kSeeds, vo.workers, [&](std::int64_t s) {
    const std::uint64_t seed = vo.seed + static_cast<std::uint64_t>(s);
    const RunTrace r = run_restarted(*p, plan, seed).trace;
    RunOptions o;
    o.seed = seed;
    const RunTrace q = run_acc_mb_sgd(*p, b, cum, o).trace;
    for (std::size_t k = 0; k < K; ++k) {
      const auto idx = static_cast<std::size_t>(boundaries[k] - 1);
      restarted[k][static_cast<std::size_t>(s)] = r.records.at(idx).subopt;
      plain[k][static_cast<std::size_t>(s)] = q.records.at(idx).subopt;
    }
  });

  bool stages_ok = K == 5;
  json stage_items = json::array();
  std::vector<std::pair<double, double>> rgrid;
  std::vector<std::pair<double, double>> pgrid;
  for (std::size_t k = 0; k < K; ++k) {
    const double mr = median(restarted[k]);
    const double mp = median(plain[k]);
    const double limit = 2.0 * std::exp(-static_cast<double>(k + 1)) * m.Delta;
    const bool ok = mr <= limit;
    stages_ok = stages_ok && ok;
    rgrid.emplace_back(static_cast<double>(boundaries[k]), mr);
    pgrid.emplace_back(static_cast<double>(boundaries[k]), mp);
    stage_items.push_back({{"stage", k + 1}, {"T", plan.stages[k].T}, {"cumulative", boundaries[k]},
                           {"median_subopt", mr}, {"limit", limit}, {"passed", ok},
                           {"plain_median_subopt", mp}});
  }
  const RateFit r_lin = fit_log_linear(rgrid);
  const RateFit p_loglog = fit_rate(pgrid);
  const RateFit p_lin = fit_log_linear(pgrid);
  const bool linear_ok = r_lin.r_squared >= 0.95;
  const bool contrast_ok = p_loglog.r_squared > p_lin.r_squared;
  c.passed = stages_ok && linear_ok && contrast_ok;
  c.metrics = {{"b", b},
               {"theta", std::numbers::e},
               {"seeds", kSeeds},
               {"stages", stage_items},
               {"restarted_log_linear", fit_json(r_lin)},
               {"plain_log_log", fit_json(p_loglog)},
               {"plain_log_linear", fit_json(p_lin)},
               {"stage_bounds_passed", stages_ok},
               {"linear_fit_passed", linear_ok},
               {"plain_power_law_passed", contrast_ok}};
  return SuiteReport{"rate_restart", {c}, 0.0};
}

SuiteReport suite_speedup(const VerifyOptions& vo) {
  SuiteReport rep{"speedup", {}, 0.0};
  const ProblemPtr p = make_interpolation_least_squares(32, 16, 1.0, 1.0, 0);
  const double eps = 1e-3;
  const double H = p->meta().H;
  const double B = p->meta().B;
  const double threshold = std::sqrt(H * B * B / eps);
  const std::vector<std::int64_t> grid = eighth_octave_grid(4096);
  const std::vector<std::int64_t> bs{1, 2, 4, 8, 16, 32, 64, 128, 256};

  std::vector<RunOutcome> acc;
  for (const std::int64_t b : bs) {
    auto o = scan_to_eps(b, grid, eps, [&](std::int64_t T) { return acc_finals(*p, b, T, vo); });
    acc.insert(acc.end(), o.begin(), o.end());
  }
  const SpeedupTable table = time_to_eps(acc, eps, bs, config_hash(p->config()));
  std::map<std::int64_t, std::optional<std::int64_t>> tte;
  json rows = json::array();
  for (const auto& r : table.rows) {
    tte[r.b] = r.T_to_eps;
    rows.push_back({{"b", r.b}, {"T_to_eps", r.T_to_eps ? json(*r.T_to_eps) : json(nullptr)}});
  }

  {
    CriterionResult c{6, "linear minibatch speedup and critical batch size", true, {}};
    json pairs = json::array();
    for (std::size_t i = 0; i + 1 < bs.size(); ++i) {
      const auto a = tte[bs[i]];
      const auto n = tte[bs[i + 1]];
      if (!a) {
        c.passed = false;
        pairs.push_back({{"b", bs[i]}, {"reached", false}});
        continue;
      }
      if (static_cast<double>(*a) <= threshold) continue;
      const bool ok = n && static_cast<double>(*n) <= 0.6 * static_cast<double>(*a);
      c.passed = c.passed && ok;
      pairs.push_back({{"b", bs[i]}, {"T_b", *a}, {"T_2b", n ? json(*n) : json(nullptr)},
                       {"ratio", n ? static_cast<double>(*n) / static_cast<double>(*a) : 1.0},
                       {"passed", ok}});
    }
    const std::optional<std::int64_t> bstar = critical_batch(table);
    const bool bstar_ok = bstar && static_cast<double>(*bstar) <= 4.0 * threshold &&
                          static_cast<double>(*bstar) >= threshold / 4.0;
    c.passed = c.passed && bstar_ok;
    c.metrics = {{"eps", eps},           {"threshold", threshold}, {"seeds", kSeeds},
                 {"T_grid_max", grid.back()}, {"T_grid_points", grid.size()},
                 {"table", rows},        {"noise_regime_pairs", pairs},
                 {"critical_batch", bstar ? json(*bstar) : json(nullptr)},
                 {"critical_batch_passed", bstar_ok}};
    rep.criteria.push_back(c);
  }
  {
    CriterionResult c{7, "plain SGD gains nothing from minibatching on an interpolating problem",
                      true, {}};
    const std::vector<double> etas{0.5 / H, 0.25 / H, 0.125 / H, 0.0625 / H};
    json sgd_rows = json::array();
    std::vector<double> reached;
    for (const std::int64_t b : {1, 4, 16}) {
      const auto o = scan_to_eps(b, grid, eps, [&](std::int64_t T) {
        std::vector<double> best;
        double best_median = std::numeric_limits<double>::infinity();
        for (const double eta : etas) {
          std::vector<double> f = sgd_finals(*p, b, T, eta, vo);
          const double m = median(f);
          if (m < best_median) {
            best_median = m;
            best = std::move(f);
          }
        }
        return best;
      });
      const SpeedupTable t = time_to_eps(o, eps, {b});
      const auto T = t.rows.front().T_to_eps;
      if (T) reached.push_back(static_cast<double>(*T));
      sgd_rows.push_back({{"b", b}, {"T_to_eps", T ? json(*T) : json(nullptr)}});
    }
    double variation = std::numeric_limits<double>::infinity();
    if (reached.size() == 3)
      variation = *std::max_element(reached.begin(), reached.end()) /
                      *std::min_element(reached.begin(), reached.end()) -
                  1.0;
    const bool flat = variation < 0.25;
    const bool acc_drops = tte[1] && tte[4] && tte[16] && *tte[4] <= 0.6 * *tte[1] &&
                           *tte[16] <= 0.6 * *tte[4];
    c.passed = flat && acc_drops;
    c.metrics = {{"eps", eps}, {"sgd", sgd_rows}, {"sgd_variation", variation},
                 {"sgd_flat", flat}, {"acc_drops", acc_drops}, {"eta_grid", etas}};
    rep.criteria.push_back(c);
  }
  return rep;
}

SuiteReport suite_sigma_star(const VerifyOptions& vo) {
  CriterionResult c{9, "noisy setting with sigma_star^2 known", true, {}};
  // Hard instance: p = sqrt(L*/(2 H B^2 T)), s^2 = 2 L*/p, so sigma*^2 = 2 H L*.
  const double H = 1.0;
  const double B = 1.0;
  const double Lstar = 0.5;
  const std::int64_t T = 1024;
  const double p = std::sqrt(Lstar / (2.0 * H * B * B * static_cast<double>(T)));
  const double s = std::sqrt(2.0 * Lstar / p);
  const ProblemPtr prob = make_gaussian_spike_problem(H, B, p, s, 1, 0);
  const double sigma_sq = prob->meta().sigma_star_sq;
  RunOptions base;
  base.noise_sq_override = sigma_sq;

  const double upper = 3.0 * stage_bound(T, B * B, H, 64, Lstar);
  const double m64 = median(acc_finals(*prob, 64, T, vo, base));
  const double lower = (1.0 / 8.0) * std::sqrt(sigma_sq) * B / std::sqrt(static_cast<double>(T));
  const double m1 = median(acc_finals(*prob, 1, T, vo, base));
  const bool upper_ok = m64 <= upper;
  const bool lower_ok = m1 >= lower / 10.0;
  c.passed = upper_ok && lower_ok;
  c.metrics = {{"p", p}, {"s", s}, {"sigma_star_sq", sigma_sq}, {"T", T}, {"seeds", kSeeds},
               {"median_b64", m64}, {"upper_limit_b64", upper}, {"upper_passed", upper_ok},
               {"median_b1", m1}, {"lower_reference_b1", lower}, {"lower_constant", 1.0 / 8.0},
               {"lower_passed", lower_ok}};
  return SuiteReport{"sigma_star", {c}, 0.0};
}

}  // namespace

SuiteReport run_suite(const std::string& name, const VerifyOptions& options) {
  static const std::map<std::string, std::function<SuiteReport(const VerifyOptions&)>> suites{
      {"assumptions", suite_assumptions}, {"lemma3", suite_lemma3},
      {"lemma1", suite_lemma1},           {"rate_convex", suite_rate_convex},
      {"rate_restart", suite_rate_restart}, {"speedup", suite_speedup},
      {"sigma_star", suite_sigma_star}};
  const auto it = suites.find(name);
  if (it == suites.end()) throw std::invalid_argument("unknown suite '" + name + "'");
  const auto start = std::chrono::steady_clock::now();
  SuiteReport rep = it->second(options);
  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace optaccel
