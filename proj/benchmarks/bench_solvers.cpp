#include <benchmark/benchmark.h>

#include "fjsrl/baselines.hpp"
#include "fjsrl/instance_io.hpp"

namespace {

void BM_DispatchSPT(benchmark::State& state) {
  fjsrl::GenConfig cfg;
  cfg.n_jobs = static_cast<int>(state.range(0));
  cfg.n_machines = static_cast<int>(state.range(1));
  cfg.seed = 1;
  const fjsrl::Instance inst = fjsrl::generate_sd(cfg, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fjsrl::dispatch_solve(inst, fjsrl::DispatchRule::SPT));
  }
}
BENCHMARK(BM_DispatchSPT)->Args({10, 5})->Args({40, 10})->Args({100, 10});

void BM_ExactSolveTiny(benchmark::State& state) {
  fjsrl::GenConfig cfg;
  cfg.n_jobs = 3;
  cfg.n_machines = 3;
  cfg.seed = 4;
  const fjsrl::Instance inst = fjsrl::generate_sd(cfg, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fjsrl::exact_solve(inst));
  }
}
BENCHMARK(BM_ExactSolveTiny);

}  // namespace
