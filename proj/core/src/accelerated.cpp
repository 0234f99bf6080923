#include "optaccel/optimizers.hpp"

#include "optaccel/hashing.hpp"

#include <algorithm>
#include <stdexcept>

namespace optaccel {

OptimizerState OptimizerState::zeros(Index d) {
  return OptimizerState{Vector::Zero(d), Vector::Zero(d), 0};
}

StepInfo acc_step(OptimizerState& state, const StepSchedule& schedule, const Problem& problem,
                  RngState& rng, StepWorkspace& ws, const Vector* center) {
  if (state.t >= schedule.T) throw std::logic_error("acc_step: horizon exhausted");
  const double beta = schedule.beta(state.t);
  const double inv = 1.0 / beta;

  ws.w_md = inv * state.w + (1.0 - inv) * state.w_ag;
  if (center != nullptr) {
    ws.point = *center + ws.w_md;
  } else {
    ws.point = ws.w_md;
  }
  sample_batch_into(problem, schedule.b, rng, ws.batch);
  problem.minibatch_gradient_into(ws.g, ws.point, ws.batch);

  StepInfo info;
  if (!ws.g.allFinite()) {
    info.finite = false;
    return info;
  }
  info.grad_noise_sq = (ws.g - problem.expected_gradient(ws.point)).squaredNorm();

  state.w.noalias() -= schedule.step(state.t) * ws.g;
  project_ball_inplace(state.w, schedule.B);
  state.w_ag = inv * state.w + (1.0 - inv) * state.w_ag;
  ++state.t;
  return info;
}

StepInfo acc_step(OptimizerState& state, const StepSchedule& schedule, const Problem& problem,
                  RngState& rng) {
  StepWorkspace ws;
  return acc_step(state, schedule, problem, rng, ws);
}

namespace {

bool should_record(std::int64_t t, std::int64_t T, std::int64_t stride) {
  return t == T || t % stride == 0;
}

}  // namespace

RunResult run_acc_mb_sgd(const Problem& problem, std::int64_t b, std::int64_t T,
                         const RunOptions& options) {
  if (options.record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
  const ProblemMeta& meta = problem.meta();
  const double B = options.B_override.value_or(meta.B);
  const double noise_sq = options.noise_sq_override.value_or(2.0 * meta.H * meta.Lstar);
  const StepSchedule schedule = make_schedule(meta.H, b, T, B, noise_sq);

  RunResult result;
  RunTrace& trace = result.trace;
  trace.header = RunHeader{problem.config(), config_hash(problem.config()), "acc_mb_sgd", b, T,
                           options.seed,     schedule.gamma,               schedule_hash(schedule),
                           nlohmann::json{{"B", B}, {"noise_sq", noise_sq}}};
  trace.records.reserve(static_cast<std::size_t>(T / options.record_stride + 1));

  OptimizerState state = OptimizerState::zeros(problem.dimension());
  RngState rng{options.seed, 0};
  StepWorkspace ws;
  while (state.t < T) {
    const StepInfo info = acc_step(state, schedule, problem, rng, ws);
    if (!info.finite) {
      trace.aborted = true;
      trace.abort_reason = "non-finite gradient at step " + std::to_string(state.t + 1);
      break;
    }
    if (should_record(state.t, T, options.record_stride)) {
      trace.records.push_back(TraceRecord{state.t, state.w.norm(), state.w_ag.norm(),
                                          problem.excess_loss(state.w_ag), 0.0,
                                          info.grad_noise_sq, 0});
    }
  }
  result.w = state.w_ag;
  return result;
}

}  // namespace optaccel
