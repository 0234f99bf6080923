#pragma once

#include "optaccel/problem.hpp"
#include "optaccel/schedule.hpp"
#include "optaccel/trace.hpp"

#include <optional>
#include <vector>

namespace optaccel {

/// (w_t, w^ag_t, t). In restarted runs both vectors are offsets from the
/// stage center.
struct OptimizerState {
  Vector w;
  Vector w_ag;
  std::int64_t t = 0;

  static OptimizerState zeros(Index d);
};

/// Scratch buffers reused across steps.
struct StepWorkspace {
  Batch batch;
  Vector w_md;
  Vector point;
  Vector g;
};

struct StepInfo {
  /// ||g - grad L(w^md)||^2.
  double grad_noise_sq = 0.0;
  bool finite = true;
};

/// One accelerated step: w^md = w/beta + (1 - 1/beta) w^ag, w <- Proj_B(w - gamma_t g(w^md)),
/// w^ag <- w/beta + (1 - 1/beta) w^ag. The gradient is taken at center + w^md
/// when `center` is non-null. On a non-finite gradient the state is left unchanged.
StepInfo acc_step(OptimizerState& state, const StepSchedule& schedule, const Problem& problem,
                  RngState& rng, StepWorkspace& ws, const Vector* center = nullptr);
StepInfo acc_step(OptimizerState& state, const StepSchedule& schedule, const Problem& problem,
                  RngState& rng);

struct RunOptions {
  std::optional<double> B_override;
  std::optional<double> noise_sq_override;
  std::uint64_t seed = 0;
  /// Record every k-th step; the last step is always recorded.
  std::int64_t record_stride = 1;
};

struct RunResult {
  Vector w;
  RunTrace trace;
};

/// T accelerated steps from w_0 = 0; returns w^ag_T. B and noise_sq default
/// to the problem's ||w*|| bound and 2 H L*.
RunResult run_acc_mb_sgd(const Problem& problem, std::int64_t b, std::int64_t T,
                         const RunOptions& options = {});

struct SgdOptions {
  /// Requested stepsize; the effective step is min(1/(2H), eta).
  double eta = 0.0;
  std::optional<double> B_override;
  std::uint64_t seed = 0;
  std::int64_t record_stride = 1;
};

/// Projected constant-step minibatch SGD from w_0 = 0 returning the average of
/// the iterates w_{floor(T/2)+1}, ..., w_T. Before the averaging window opens
/// the trace reports the current iterate.
RunResult run_sgd(const Problem& problem, std::int64_t b, std::int64_t T,
                  const SgdOptions& options);

/// Smallest T with 108 H B^2/T^2 + 144 H B^2/(bT) + 27 sigma B/sqrt(bT) <= eps,
/// sigma = sqrt(2 H L*).
std::int64_t stage_budget(double eps, double B_sq, double H, std::int64_t b, double Lstar);

/// Value of the bound minimized by stage_budget.
double stage_bound(std::int64_t T, double B_sq, double H, std::int64_t b, double Lstar);

struct Stage {
  double eps = 0.0;
  double B = 0.0;
  std::int64_t T = 0;
};

struct StagePlan {
  double theta = 0.0;
  double lambda = 0.0;
  double Delta = 0.0;
  double H = 0.0;
  std::int64_t b = 0;
  double Lstar = 0.0;
  std::vector<Stage> stages;

  std::int64_t total_iterations() const;
};

/// ceil(log_theta(Delta/eps)) stages with eps_t = theta^-t Delta and
/// B_t^2 = 2 theta^(1-t) Delta / lambda. eps >= Delta yields an empty plan.
StagePlan make_stage_plan(double Delta, double eps, double theta, double lambda, double H,
                          std::int64_t b, double Lstar);

/// Runs the accelerated method once per stage, centered at the previous stage's
/// output with radius B_t. The sampling cursor continues across stages.
RunResult run_restarted(const Problem& problem, const StagePlan& plan, std::uint64_t seed,
                        std::int64_t record_stride = 1);

nlohmann::json plan_json(const StagePlan& plan);

}  // namespace optaccel
