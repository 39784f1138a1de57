#include <benchmark/benchmark.h>

#include "fjsrl/env.hpp"
#include "fjsrl/instance_io.hpp"
#include "fjsrl/rng.hpp"

namespace {

fjsrl::Instance make_instance(int jobs, int machines) {
  fjsrl::GenConfig cfg;
  cfg.n_jobs = jobs;
  cfg.n_machines = machines;
  cfg.seed = 1;
  return fjsrl::generate_sd(cfg, 0);
}

void BM_RandomRollout(benchmark::State& state) {
  const fjsrl::Instance inst =
      make_instance(static_cast<int>(state.range(0)),
                    static_cast<int>(state.range(1)));
  fjsrl::RngStream rng(7, 0);
  for (auto _ : state) {
    fjsrl::EnvState env(inst);
    while (!env.done()) {
      const auto cands = env.candidates();
      env.step(cands[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(cands.size()) - 1))]);
    }
    benchmark::DoNotOptimize(env.steps_done());
  }
  state.SetItemsProcessed(state.iterations() * inst.total_ops());
}
BENCHMARK(BM_RandomRollout)->Args({10, 5})->Args({20, 10});

void BM_ExtractFeatures(benchmark::State& state) {
  const fjsrl::Instance inst = make_instance(10, 5);
  fjsrl::EnvState env(inst);
  // Mid-episode state: half the ops scheduled.
  fjsrl::RngStream rng(7, 1);
  for (int i = 0; i < inst.total_ops() / 2; ++i) {
    const auto cands = env.candidates();
    env.step(cands[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(cands.size()) - 1))]);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(env.extract_features());
  }
}
BENCHMARK(BM_ExtractFeatures);

}  // namespace
