#include <benchmark/benchmark.h>

#include "fjsrl/instance_io.hpp"
#include "fjsrl/policy.hpp"
#include "fjsrl/ppo.hpp"

namespace {

void BM_PolicyForward(benchmark::State& state) {
  fjsrl::GenConfig cfg;
  cfg.n_jobs = static_cast<int>(state.range(0));
  cfg.n_machines = static_cast<int>(state.range(1));
  cfg.seed = 1;
  const fjsrl::Instance inst = fjsrl::generate_sd(cfg, 0);
  fjsrl::PolicyNet net(fjsrl::NetConfig{}, 0);
  const fjsrl::FeatureBundle fb = fjsrl::EnvState(inst).extract_features();
  for (auto _ : state) {
    fjsrl::Tape tape(false);
    benchmark::DoNotOptimize(net.forward(tape, fb));
  }
}
BENCHMARK(BM_PolicyForward)->Args({10, 5})->Args({20, 10});

void BM_ForwardBackward(benchmark::State& state) {
  fjsrl::GenConfig cfg;
  cfg.n_jobs = 10;
  cfg.n_machines = 5;
  cfg.seed = 1;
  const fjsrl::Instance inst = fjsrl::generate_sd(cfg, 0);
  fjsrl::PolicyNet net(fjsrl::NetConfig{}, 0);
  const fjsrl::FeatureBundle fb = fjsrl::EnvState(inst).extract_features();
  for (auto _ : state) {
    fjsrl::Tape tape(true);
    fjsrl::PolicyOutput out = net.forward(tape, fb);
    int action = 0;
    for (std::size_t i = 0; i < out.flat_mask.size(); ++i) {
      if (out.flat_mask[i]) {
        action = static_cast<int>(i);
        break;
      }
    }
    const fjsrl::Tensor loss =
        tape.add(tape.log(tape.pick(out.probs, action)), out.value);
    tape.backward(loss);
    benchmark::DoNotOptimize(net.params().grad_norm());
    net.params().zero_grad();
  }
}
BENCHMARK(BM_ForwardBackward);

void BM_GreedyEpisode(benchmark::State& state) {
  fjsrl::GenConfig cfg;
  cfg.n_jobs = 10;
  cfg.n_machines = 5;
  cfg.seed = 1;
  const fjsrl::Instance inst = fjsrl::generate_sd(cfg, 0);
  fjsrl::PolicyNet net(fjsrl::NetConfig{}, 0);
  fjsrl::RngStream rng(0, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fjsrl::run_episode(net, inst, fjsrl::SelectMode::Greedy, rng));
  }
}
BENCHMARK(BM_GreedyEpisode);

}  // namespace
