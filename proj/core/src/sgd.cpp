#include "optaccel/optimizers.hpp"

#include "optaccel/hashing.hpp"

#include <algorithm>
#include <stdexcept>

namespace optaccel {

RunResult run_sgd(const Problem& problem, std::int64_t b, std::int64_t T,
                  const SgdOptions& options) {
  if (b < 1) throw std::invalid_argument("run_sgd: b must be >= 1");
  if (T < 1) throw std::invalid_argument("run_sgd: T must be >= 1");
  if (!(options.eta > 0.0)) throw std::invalid_argument("run_sgd: eta must be positive");
  if (options.record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
  const ProblemMeta& meta = problem.meta();
  const double B = options.B_override.value_or(meta.B);
  if (!(B > 0.0)) throw std::invalid_argument("run_sgd: B must be positive");
  const double eta = std::min(1.0 / (2.0 * meta.H), options.eta);

  RunResult result;
  RunTrace& trace = result.trace;
  const std::string sched = nlohmann::json{{"eta", eta}, {"B", B}, {"b", b}, {"T", T}}.dump();
  trace.header = RunHeader{problem.config(), config_hash(problem.config()), "sgd", b, T,
                           options.seed,     eta,  sha256_hex(sched),
                           nlohmann::json{{"B", B}, {"eta_requested", options.eta}}};

  const Index d = problem.dimension();
  Vector w = Vector::Zero(d);
  Vector sum = Vector::Zero(d);
  Vector avg = Vector::Zero(d);
  const std::int64_t tail_start = T / 2;  // average w_{tail_start+1..T}
  std::int64_t count = 0;
  RngState rng{options.seed, 0};
  Batch batch;
  Vector g;
  for (std::int64_t t = 0; t < T; ++t) {
    sample_batch_into(problem, b, rng, batch);
    problem.minibatch_gradient_into(g, w, batch);
    if (!g.allFinite()) {
      trace.aborted = true;
      trace.abort_reason = "non-finite gradient at step " + std::to_string(t + 1);
      break;
    }
    const double noise = (g - problem.expected_gradient(w)).squaredNorm();
    w.noalias() -= eta * g;
    project_ball_inplace(w, B);
    if (t >= tail_start) {
      sum += w;
      ++count;
      avg = sum / static_cast<double>(count);
    } else {
      avg = w;
    }
    if ((t + 1 == T || (t + 1) % options.record_stride == 0)) {
      trace.records.push_back(
          TraceRecord{t + 1, w.norm(), avg.norm(), problem.excess_loss(avg), 0.0, noise, 0});
    }
  }
  result.w = avg;
  return result;
}

}  // namespace optaccel
