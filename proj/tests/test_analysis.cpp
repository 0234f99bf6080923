#include "optaccel/families.hpp"
#include "optaccel/oracles.hpp"
#include "optaccel/rates.hpp"
#include "optaccel/schedule.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace optaccel;

namespace {

std::vector<std::pair<double, double>> power_law(double c, double k, std::int64_t lo, std::int64_t hi) {
  std::vector<std::pair<double, double>> g;
  for (std::int64_t T = lo; T <= hi; T *= 2) g.emplace_back(T, c * std::pow(T, k));
  return g;
}

}  // namespace

TEST(ExactMin, FirstOrderOptimality) {
  for (const ProblemPtr& p : {make_interpolation_least_squares(32, 16, 1.0, 1.0, 3),
                              make_sign_vector_problem(3, 1.0, 2.0, {1, -1, 1, 1, -1, 1}),
                              make_gaussian_spike_problem(2.0, 1.5, 0.4, 1.0, -1, 0),
                              make_growth_problem(8, 5, 0.05, 1.0, 2.0, 4)}) {
    const ExactMinimum em = exact_min(*p);
    EXPECT_LE(p->expected_gradient(em.wstar).norm(), 1e-8) << p->config().family;
    EXPECT_NEAR(em.Lstar, p->meta().Lstar, 1e-9);
    EXPECT_LE((em.wstar - *p->meta().wstar).norm(), 1e-9);
  }
}

TEST(ExactMin, RefusesNonLeastSquares) {
  EXPECT_THROW(exact_min(*make_noiseless_quadratic(4, 1.0, 1.0, 10.0)), std::invalid_argument);
}

TEST(VarianceAt, ZeroAtInterpolator) {
  const ProblemPtr p = make_interpolation_least_squares(16, 8, 1.0, 1.0, 0);
  const Estimate e = variance_at(*p, *p->meta().wstar, 5000, 0);
  EXPECT_EQ(e.value, 0.0);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(VarianceAt, SpikeAnalyticValueWithinThreeStandardErrors) {
  const ProblemPtr p = make_gaussian_spike_problem(1.0, 1.0, 0.5, 1.0, 1, 0);
  const Estimate e = variance_at(*p, *p->meta().wstar, 100000, 8);
  EXPECT_LE(std::abs(e.value - 0.5), 3 * e.std_error);
  EXPECT_LE(e.value, 2 * p->meta().H * p->meta().Lstar + 3 * e.std_error);
}

TEST(VarianceAt, RejectsTooFewSamples) {
  const ProblemPtr p = make_gaussian_spike_problem(1.0, 1.0, 0.5, 1.0, 1, 0);
  EXPECT_THROW(variance_at(*p, Vector::Zero(1), 1, 0), std::invalid_argument);
}

TEST(FitRate, ExactPowerLaws) {
  const RateFit a = fit_rate(power_law(5.0, -2.0, 8, 64));
  EXPECT_NEAR(a.slope, -2.0, 1e-12);
  EXPECT_NEAR(a.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(a.intercept, std::log(5.0), 1e-12);
  EXPECT_NEAR(fit_rate(power_law(3.0, -1.0, 8, 64)).slope, -1.0, 1e-12);
}

TEST(FitRate, NoisyPowerLawSlopeInterval) {
  // value = (2/T^2) exp(e), e ~ N(0, 0.01) on T = 8..1024.
  const CounterRng rng(2024);
  int inside = 0;
  const int reps = 2000;
  for (int r = 0; r < reps; ++r) {
    std::vector<std::pair<double, double>> g;
    std::uint64_t i = 0;
    for (std::int64_t T = 8; T <= 1024; T *= 2)
      g.emplace_back(T, 2.0 / (T * T) * std::exp(0.1 * rng.normal(r, i++, 0)));
    const double s = fit_rate(g).slope;
    inside += (s >= -2.15 && s <= -1.85);
  }
  EXPECT_GE(static_cast<double>(inside) / reps, 0.99);
}

TEST(FitRate, ScaleEquivariantInValue) {
  auto g = power_law(1.0, -1.3, 4, 512);
  for (std::size_t i = 0; i < g.size(); ++i) g[i].second *= 1.0 + 0.1 * std::sin(static_cast<double>(i));
  const RateFit a = fit_rate(g);
  for (auto& [T, v] : g) v *= 37.5;
  const RateFit b = fit_rate(g);
  EXPECT_NEAR(a.slope, b.slope, 1e-12);
  EXPECT_NEAR(b.intercept - a.intercept, std::log(37.5), 1e-12);
  EXPECT_GE(a.r_squared, 0.0);
  EXPECT_LE(a.r_squared, 1.0);
}

TEST(FitRate, RejectsBadInput) {
  EXPECT_THROW(fit_rate(power_law(1.0, -1.0, 8, 32)), std::invalid_argument);
  auto g = power_law(1.0, -1.0, 8, 128);
  g[1].second = 0.0;
  EXPECT_THROW(fit_rate(g), std::invalid_argument);
}

TEST(FitLogLinear, ExactExponential) {
  std::vector<std::pair<double, double>> g;
  for (int T = 100; T <= 500; T += 100) g.emplace_back(T, 3.0 * std::exp(-0.02 * T));
  const RateFit f = fit_log_linear(g);
  EXPECT_NEAR(f.slope, -0.02, 1e-14);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(median({5, 1, 3}), 3.0);
  EXPECT_DOUBLE_EQ(median({1, 2, 3, 10}), 2.5);
  EXPECT_THROW(median({}), std::invalid_argument);
}

namespace {

std::vector<RunOutcome> synthetic_outcomes() {
  std::vector<RunOutcome> out;
  for (const std::int64_t b : {1, 2, 4}) {
    for (const std::int64_t T : {10, 20, 40, 80}) {
      for (std::uint64_t s = 0; s < 20; ++s)
        out.push_back({b, T, s, (1.0 + 0.01 * static_cast<double>(s)) / static_cast<double>(b * T)});
    }
  }
  return out;
}

}  // namespace

TEST(TimeToEps, SmallestReachingHorizon) {
  const SpeedupTable t = time_to_eps(synthetic_outcomes(), 0.03, {1, 2, 4, 8});
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[0].T_to_eps, 40);
  EXPECT_EQ(t.rows[1].T_to_eps, 20);
  EXPECT_EQ(t.rows[2].T_to_eps, 10);
  EXPECT_FALSE(t.rows[3].has_data);
  EXPECT_FALSE(t.rows[3].T_to_eps.has_value());
  EXPECT_EQ(t.seeds, 20u);
  EXPECT_FALSE(time_to_eps(synthetic_outcomes(), 1e-9, {1}).rows[0].T_to_eps.has_value());
}

TEST(TimeToEps, DoublingValuesNeverShortensTime) {
  auto outcomes = synthetic_outcomes();
  const SpeedupTable a = time_to_eps(outcomes, 0.02, {1, 2, 4});
  for (auto& o : outcomes) o.subopt *= 2.0;
  const SpeedupTable b = time_to_eps(outcomes, 0.02, {1, 2, 4});
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    if (!b.rows[i].T_to_eps) continue;
    ASSERT_TRUE(a.rows[i].T_to_eps.has_value());
    EXPECT_GE(*b.rows[i].T_to_eps, *a.rows[i].T_to_eps);
  }
}

TEST(TimeToEps, Deterministic) {
  const auto o = synthetic_outcomes();
  const SpeedupTable a = time_to_eps(o, 0.03, {4, 1, 2});
  const SpeedupTable b = time_to_eps(o, 0.03, {4, 1, 2});
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].b, b.rows[i].b);
    EXPECT_EQ(a.rows[i].T_to_eps, b.rows[i].T_to_eps);
  }
  EXPECT_EQ(a.rows[0].b, 4);
}

namespace {

SpeedupTable table_from(const std::vector<std::pair<std::int64_t, std::int64_t>>& rows) {
  SpeedupTable t;
  for (const auto& [b, T] : rows) t.rows.push_back({b, true, T});
  return t;
}

}  // namespace

TEST(CriticalBatch, PlateauDetection) {
  std::vector<std::pair<std::int64_t, std::int64_t>> rows;
  for (std::int64_t b = 1; b <= 256; b *= 2) rows.emplace_back(b, std::max<std::int64_t>(100, 1600 / b));
  EXPECT_EQ(critical_batch(table_from(rows)), 16);
}

TEST(CriticalBatch, FlatTableGivesSmallestB) {
  EXPECT_EQ(critical_batch(table_from({{2, 50}, {4, 50}, {8, 50}, {16, 50}})), 2);
}

TEST(CriticalBatch, UnsaturatedAndTooSmall) {
  EXPECT_FALSE(critical_batch(table_from({{1, 800}, {2, 400}, {4, 200}, {8, 100}})).has_value());
  EXPECT_THROW(critical_batch(table_from({{1, 8}, {2, 8}, {4, 8}})), std::invalid_argument);
}

TEST(ProjectionInequality, EqualityAtProjectedPoint) {
  ProjectionInstance in{Vector::Zero(3), Vector::Zero(3), Vector::Zero(3), 0.7, 1.0};
  in.w_t << 0.2, 0.5, -0.1;
  in.w_md << -0.3, 0.1, 0.4;
  in.g << 3.0, -1.0, 2.0;
  const Vector w_next = project_ball(in.w_t - in.gamma * in.g, in.B);
  const ProjectionCheck c = check_projection_lemma(in, {w_next});
  EXPECT_TRUE(c.passed);
  EXPECT_LE(c.equality_gap, 1e-12);
  EXPECT_LE(std::abs(c.max_violation), 1e-12);
}

TEST(ProjectionInequality, UnconstrainedReducesToSquaredDistance) {
  const CounterRng rng(8);
  ProjectionInstance in{uniform_in_ball(4, 1.0, rng, 0, 0), uniform_in_ball(4, 1.0, rng, 0, 1),
                        uniform_in_ball(4, 3.0, rng, 0, 2), 0.4, 1e9};
  std::vector<Vector> probes;
  for (std::uint64_t i = 0; i < 100; ++i) probes.push_back(uniform_in_ball(4, 10.0, rng, 1, i));
  const ProjectionCheck c = check_projection_lemma(in, probes);
  EXPECT_TRUE(c.passed);
  EXPECT_LE(c.max_violation, 1e-9);
}

TEST(ProjectionInequality, RandomInstancesNeverViolate) {
  const CounterRng rng(77);
  for (std::uint64_t n = 0; n < 200; ++n) {
    const Index d = 1 + static_cast<Index>(n % 6);
    const double B = 0.1 + 9.9 * rng.uniform(n, 0, 0);
    ProjectionInstance in{uniform_in_ball(d, B, rng, n, 1), uniform_in_ball(d, B, rng, n, 2),
                          uniform_in_ball(d, 5.0, rng, n, 3), rng.uniform(n, 0, 1), B};
    std::vector<Vector> probes;
    for (std::uint64_t q = 0; q < 100; ++q) probes.push_back(uniform_in_ball(d, B, rng, n, 10 + q));
    const ProjectionCheck c = check_projection_lemma(in, probes);
    EXPECT_TRUE(c.passed);
    EXPECT_LE(c.equality_gap, 1e-12);
  }
}

TEST(ProjectionInequality, RejectsProbeOutsideBall) {
  ProjectionInstance in{Vector::Zero(2), Vector::Zero(2), Vector::Ones(2), 0.5, 1.0};
  EXPECT_THROW(check_projection_lemma(in, {Vector::Constant(2, 5.0)}), std::invalid_argument);
}
