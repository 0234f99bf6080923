#include "optaccel/hashing.hpp"
#include "optaccel/optimizers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace optaccel {

double stage_bound(std::int64_t T, double B_sq, double H, std::int64_t b, double Lstar) {
  const double Td = static_cast<double>(T);
  const double bd = static_cast<double>(b);
  const double sigma = std::sqrt(2.0 * H * Lstar);
  return 108.0 * H * B_sq / (Td * Td) + 144.0 * H * B_sq / (bd * Td) +
         27.0 * sigma * std::sqrt(B_sq) / std::sqrt(bd * Td);
}

std::int64_t stage_budget(double eps, double B_sq, double H, std::int64_t b, double Lstar) {
  if (!(eps > 0.0)) throw std::invalid_argument("stage_budget: eps must be positive");
  if (!(B_sq > 0.0)) throw std::invalid_argument("stage_budget: B_sq must be positive");
  if (!(H > 0.0)) throw std::invalid_argument("stage_budget: H must be positive");
  if (b < 1) throw std::invalid_argument("stage_budget: b must be >= 1");
  if (!(Lstar >= 0.0)) throw std::invalid_argument("stage_budget: Lstar must be >= 0");

  const auto ok = [&](std::int64_t T) { return stage_bound(T, B_sq, H, b, Lstar) <= eps; };
  std::int64_t hi = 1;
  while (!ok(hi)) {
    if (hi > std::numeric_limits<std::int64_t>::max() / 4)
      throw std::overflow_error("stage_budget: horizon overflow");
    hi *= 2;
  }
  if (hi == 1) return 1;
  std::int64_t lo = hi / 2;  // invariant: !ok(lo), ok(hi)
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

std::int64_t StagePlan::total_iterations() const {
  std::int64_t total = 0;
  for (const Stage& s : stages) total += s.T;
  return total;
}

StagePlan make_stage_plan(double Delta, double eps, double theta, double lambda, double H,
                          std::int64_t b, double Lstar) {
  if (!(theta > 1.0)) throw std::invalid_argument("make_stage_plan: theta must be > 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("make_stage_plan: lambda must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("make_stage_plan: eps must be positive");
  if (!(Delta > 0.0)) throw std::invalid_argument("make_stage_plan: Delta must be positive");
  if (!(H > 0.0)) throw std::invalid_argument("make_stage_plan: H must be positive");
  if (b < 1) throw std::invalid_argument("make_stage_plan: b must be >= 1");
  if (!(Lstar >= 0.0)) throw std::invalid_argument("make_stage_plan: Lstar must be >= 0");

  StagePlan plan{theta, lambda, Delta, H, b, Lstar, {}};
  if (eps >= Delta) return plan;
  // The 1e-9 slack keeps exact powers of theta from rounding up a stage.
  const auto count =
      static_cast<std::int64_t>(std::ceil(std::log(Delta / eps) / std::log(theta) - 1e-9));
  for (std::int64_t t = 1; t <= count; ++t) {
    const double td = static_cast<double>(t);
    const double eps_t = std::pow(theta, -td) * Delta;
    const double B_sq = 2.0 * std::pow(theta, 1.0 - td) * Delta / lambda;
    plan.stages.push_back(Stage{eps_t, std::sqrt(B_sq), stage_budget(eps_t, B_sq, H, b, Lstar)});
  }
  return plan;
}

nlohmann::json plan_json(const StagePlan& plan) {
  nlohmann::json stages = nlohmann::json::array();
  for (const Stage& s : plan.stages) stages.push_back({{"eps", s.eps}, {"B", s.B}, {"T", s.T}});
  return {{"theta", plan.theta}, {"lambda", plan.lambda}, {"Delta", plan.Delta},
          {"H", plan.H},         {"b", plan.b},           {"Lstar", plan.Lstar},
          {"stages", stages}};
}

RunResult run_restarted(const Problem& problem, const StagePlan& plan, std::uint64_t seed,
                        std::int64_t record_stride) {
  if (record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
  const double noise_sq = 2.0 * plan.H * plan.Lstar;

  RunResult result;
  RunTrace& trace = result.trace;
  std::vector<StepSchedule> schedules;
  std::string joined;
  nlohmann::json gammas = nlohmann::json::array();
  for (const Stage& s : plan.stages) {
    schedules.push_back(make_schedule(plan.H, plan.b, s.T, s.B, noise_sq));
    joined += schedule_hash(schedules.back());
    gammas.push_back(schedules.back().gamma);
  }
  trace.header = RunHeader{problem.config(),
                           config_hash(problem.config()),
                           "restarted",
                           plan.b,
                           plan.total_iterations(),
                           seed,
                           schedules.empty() ? 0.0 : schedules.front().gamma,
                           sha256_hex(joined),
                           nlohmann::json{{"plan", plan_json(plan)}, {"stage_gammas", gammas}}};

  Vector center = Vector::Zero(problem.dimension());
  RngState rng{seed, 0};
  StepWorkspace ws;
  std::int64_t done = 0;
  for (std::size_t k = 0; k < schedules.size() && !trace.aborted; ++k) {
    const StepSchedule& schedule = schedules[k];
    const int stage = static_cast<int>(k) + 1;
    OptimizerState state = OptimizerState::zeros(problem.dimension());
    while (state.t < schedule.T) {
      const StepInfo info = acc_step(state, schedule, problem, rng, ws, &center);
      if (!info.finite) {
        trace.aborted = true;
        trace.abort_reason = "non-finite gradient at step " + std::to_string(done + state.t + 1);
        break;
      }
      const std::int64_t t = done + state.t;
      if (state.t == schedule.T || t % record_stride == 0) {
        trace.records.push_back(TraceRecord{t, state.w.norm(), state.w_ag.norm(),
                                            problem.excess_loss(center + state.w_ag), 0.0,
                                            info.grad_noise_sq, stage});
      }
    }
    center += state.w_ag;
    done += schedule.T;
  }
  result.w = center;
  return result;
}

}  // namespace optaccel
