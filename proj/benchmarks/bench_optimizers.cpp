#include "optaccel/families.hpp"
#include "optaccel/optimizers.hpp"

#include <benchmark/benchmark.h>

using namespace optaccel;

namespace {

void BM_AccStep(benchmark::State& st) {
  const auto d = static_cast<Index>(st.range(0));
  const auto b = st.range(1);
  const auto problem = make_interpolation_least_squares(d, d / 2, 1.0, 1.0, 0);
  const StepSchedule schedule = make_schedule(1.0, b, 1 << 20, 1.0, 0.0);
  OptimizerState state = OptimizerState::zeros(d);
  RngState rng{7, 0};
  StepWorkspace ws;
  for (auto _ : st) {
    benchmark::DoNotOptimize(acc_step(state, schedule, *problem, rng, ws));
  }
  st.SetItemsProcessed(st.iterations() * b);
}
BENCHMARK(BM_AccStep)->Args({32, 1})->Args({32, 64})->Args({256, 16})->Args({1024, 256});

void BM_MinibatchGradient(benchmark::State& st) {
  const auto d = static_cast<Index>(st.range(0));
  const auto b = static_cast<Index>(st.range(1));
  const auto problem = make_growth_problem(d, d / 2, 1e-3, 1.0, 1.0, 3);
  RngState rng{11, 0};
  Batch batch;
  sample_batch_into(*problem, b, rng, batch);
  const Vector w = Vector::Constant(d, 0.1);
  for (auto _ : st) benchmark::DoNotOptimize(minibatch_gradient(*problem, w, batch));
  st.SetItemsProcessed(st.iterations() * b);
}
BENCHMARK(BM_MinibatchGradient)->Args({64, 16})->Args({64, 1024})->Args({512, 256});

void BM_StageBudget(benchmark::State& st) {
  double eps = 1e-1;
  for (auto _ : st) {
    benchmark::DoNotOptimize(stage_budget(eps, 2.0, 1.0, 64, 0.05));
    eps = eps > 1e-8 ? eps * 0.5 : 1e-1;
  }
}
BENCHMARK(BM_StageBudget);

}  // namespace

BENCHMARK_MAIN();
