#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "fjsrl/instance_io.hpp"
#include "fjsrl/ppo.hpp"
#include "oracles.hpp"

using namespace fjsrl;

namespace {

Trajectory toy_trajectory(const std::vector<double>& rewards,
                          const std::vector<double>& values) {
  Trajectory traj;
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    TrajectoryStep s;
    s.reward = rewards[t];
    s.value = values[t];
    s.done = t + 1 == rewards.size();
    traj.steps.push_back(s);
  }
  return traj;
}

NetConfig tiny_net() {
  NetConfig cfg;
  cfg.scale_dims = {8, 4};
  return cfg;
}

std::string temp_dir(const char* tag) {
  const auto dir = std::filesystem::temp_directory_path() /
                   (std::string("fjsrl_test_") + tag);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("gae closed forms") {
  SUBCASE("single step episode") {
    const Trajectory traj = toy_trajectory({2.5}, {0.7});
    std::vector<double> adv, ret;
    gae_advantages(traj, 1.0, 0.5, adv, ret);
    REQUIRE(adv.size() == 1);
    CHECK(adv[0] == doctest::Approx(2.5 - 0.7));
    CHECK(ret[0] == doctest::Approx(2.5));
  }
  SUBCASE("lambda 1, gamma 1 gives Monte Carlo advantages") {
    const std::vector<double> r{1.0, -2.0, 3.0, 0.5};
    const std::vector<double> v{0.3, 0.1, -0.4, 0.9};
    const Trajectory traj = toy_trajectory(r, v);
    std::vector<double> adv, ret;
    gae_advantages(traj, 1.0, 1.0, adv, ret);
    for (std::size_t t = 0; t < r.size(); ++t) {
      double tail = 0.0;
      for (std::size_t u = t; u < r.size(); ++u) tail += r[u];
      CHECK(adv[t] == doctest::Approx(tail - v[t]).epsilon(1e-12));
      CHECK(ret[t] == doctest::Approx(tail).epsilon(1e-12));
    }
  }
  SUBCASE("lambda 0 gives one-step TD residuals") {
    const std::vector<double> r{1.0, -2.0, 3.0};
    const std::vector<double> v{0.3, 0.1, -0.4};
    const Trajectory traj = toy_trajectory(r, v);
    std::vector<double> adv, ret;
    // lambda must be > 0 by config validation; call the function directly.
    gae_advantages(traj, 0.9, 0.0, adv, ret);
    CHECK(adv[0] == doctest::Approx(r[0] + 0.9 * v[1] - v[0]).epsilon(1e-12));
    CHECK(adv[1] == doctest::Approx(r[1] + 0.9 * v[2] - v[1]).epsilon(1e-12));
    CHECK(adv[2] == doctest::Approx(r[2] - v[2]).epsilon(1e-12));
  }
}

TEST_CASE("rollout trajectories telescope and have full length") {
  GenConfig gen;
  gen.n_jobs = 3;
  gen.n_machines = 3;
  gen.seed = 17;
  std::vector<Instance> instances;
  for (int i = 0; i < 4; ++i) instances.push_back(generate_sd(gen, i));
  PolicyNet policy(tiny_net(), 1);

  const auto trajs = collect_rollouts(policy, instances, SelectMode::Sampling,
                                      1, /*batch_tag=*/0);
  REQUIRE(trajs.size() == 4);
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    CHECK(static_cast<int>(trajs[i].steps.size()) == instances[i].total_ops());
    double reward_sum = 0.0;
    for (const TrajectoryStep& s : trajs[i].steps) reward_sum += s.reward;
    CHECK(std::fabs(reward_sum - (trajs[i].initial_estimate -
                                  trajs[i].final_makespan)) <= 1e-9);
    CHECK(trajs[i].steps.back().done);
  }

  // Fixed seeds reproduce the rollouts exactly.
  PolicyNet policy2(tiny_net(), 1);
  const auto again = collect_rollouts(policy2, instances, SelectMode::Sampling,
                                      1, 0);
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    CHECK(again[i].final_makespan == trajs[i].final_makespan);
    for (std::size_t t = 0; t < trajs[i].steps.size(); ++t) {
      CHECK(again[i].steps[t].action == trajs[i].steps[t].action);
      CHECK(again[i].steps[t].log_prob == trajs[i].steps[t].log_prob);
    }
  }
}

TEST_CASE("first epoch has ratio one and inactive clip") {
  GenConfig gen;
  gen.n_jobs = 2;
  gen.n_machines = 2;
  gen.seed = 7;
  std::vector<Instance> instances{generate_sd(gen, 0), generate_sd(gen, 1)};
  PolicyNet policy(tiny_net(), 2);
  const auto batch =
      collect_rollouts(policy, instances, SelectMode::Sampling, 2, 0);

  PPOConfig cfg;
  cfg.clip_eps = 0.2;
  // Unchanged parameters: ratio = 1 everywhere, so the clipped and unclipped
  // branches agree and actor loss = -mean(advantage).
  const LossReport report = evaluate_batch_loss(policy, batch, cfg);
  double mean_adv = 0.0;  // normalized advantages have mean 0
  CHECK(std::fabs(report.actor_loss - (-mean_adv)) <= 1e-9);

}

TEST_CASE("huge clip bound equals vanilla policy gradient on a shifted policy") {
  GenConfig gen;
  gen.n_jobs = 3;
  gen.n_machines = 2;
  gen.seed = 23;
  std::vector<Instance> instances{generate_sd(gen, 0), generate_sd(gen, 1)};
  PolicyNet policy(tiny_net(), 6);
  const auto batch =
      collect_rollouts(policy, instances, SelectMode::Sampling, 6, 0);

  // Shift the parameters so the ratios are far from 1.
  RngStream jitter(91, 0);
  for (Param& p : policy.params().params()) {
    for (double& w : p.value) w += jitter.uniform_symmetric(0.05);
  }

  PPOConfig cfg;
  cfg.clip_eps = 1e9;  // clip never binds
  const LossReport huge = evaluate_batch_loss(policy, batch, cfg);

  // Vanilla policy gradient surrogate: -mean(rho * normalized advantage),
  // recomputed here from scratch.
  std::vector<double> advantages, returns, flat_adv;
  std::vector<const TrajectoryStep*> steps;
  for (const Trajectory& traj : batch) {
    gae_advantages(traj, cfg.gamma, cfg.gae_lambda, advantages, returns);
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      steps.push_back(&traj.steps[t]);
      flat_adv.push_back(advantages[t]);
    }
  }
  double mean = 0.0;
  for (double a : flat_adv) mean += a;
  mean /= static_cast<double>(flat_adv.size());
  double var = 0.0;
  for (double a : flat_adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(flat_adv.size());
  const double denom = std::sqrt(var) + 1e-8;

  double vanilla = 0.0;
  bool ratio_moved = false;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    Tape tape(false);
    const PolicyOutput out = policy.forward(tape, steps[i]->features);
    const double lp_new = std::log(out.probs.value_at(steps[i]->action));
    const double rho = std::exp(lp_new - steps[i]->log_prob);
    if (std::fabs(rho - 1.0) > 0.01) ratio_moved = true;
    vanilla += -rho * (flat_adv[i] - mean) / denom;
  }
  vanilla /= static_cast<double>(steps.size());
  CHECK(ratio_moved);
  CHECK(std::fabs(huge.actor_loss - vanilla) <= 1e-9);
}

TEST_CASE("all-zero advantages give zero actor loss") {
  // Single-op instance rolled out twice: identical one-step episodes, so the
  // raw advantages are equal and normalize to exactly zero.
  const Instance inst = oracle::make_instance(1, {{{{0, 5}}}});
  PolicyNet policy(tiny_net(), 3);
  const auto batch =
      collect_rollouts(policy, {inst, inst}, SelectMode::Sampling, 3, 0);
  PPOConfig cfg;
  const LossReport report = evaluate_batch_loss(policy, batch, cfg);
  CHECK(std::fabs(report.actor_loss) <= 1e-12);
}

TEST_CASE("one update step decreases the batch loss at small lr") {
  GenConfig gen;
  gen.n_jobs = 2;
  gen.n_machines = 2;
  gen.seed = 11;
  std::vector<Instance> instances;
  for (int i = 0; i < 3; ++i) instances.push_back(generate_sd(gen, i));
  PolicyNet policy(tiny_net(), 4);
  // Perturb the head output layers so values and logits are not all zero.
  RngStream rng(55, 0);
  for (Param& p : policy.params().params()) {
    if (p.name.find(".out.") != std::string::npos) {
      for (double& w : p.value) w = rng.uniform_symmetric(0.1);
    }
  }
  const auto batch =
      collect_rollouts(policy, instances, SelectMode::Sampling, 4, 0);

  PPOConfig cfg;
  cfg.lr = 1e-4;
  cfg.epochs_per_update = 1;
  cfg.entropy_coef = 0.0;  // entropy rewards exploration, not descent
  const LossReport before = evaluate_batch_loss(policy, batch, cfg);
  ppo_update(policy, batch, cfg);
  const LossReport after = evaluate_batch_loss(policy, batch, cfg);
  CHECK(after.total_loss < before.total_loss);
}

TEST_CASE("checkpoint save/load round trip is bit exact") {
  const std::string dir = temp_dir("ckpt");
  const std::string path = dir + "/net.ckpt.json";
  PolicyNet policy(tiny_net(), 9);
  // Give the parameters non-trivial values.
  RngStream rng(77, 0);
  for (Param& p : policy.params().params()) {
    for (double& w : p.value) w = rng.uniform_symmetric(1.7);
    for (double& m : p.m) m = rng.uniform_symmetric(0.3);
    for (double& v : p.v) v = rng.uniform_double();
  }
  policy.params().set_adam_steps(42);
  policy.save(path);

  PolicyNet loaded = PolicyNet::load(path);
  CHECK(loaded.params().adam_steps() == 42);
  const Instance inst = oracle::tiny_oracle_instance();
  Tape t1(false), t2(false);
  const FeatureBundle fb = EnvState(inst).extract_features();
  const PolicyOutput a = policy.forward(t1, fb);
  const PolicyOutput b = loaded.forward(t2, fb);
  CHECK(a.value.scalar() == b.value.scalar());
  const auto pa = a.probs.to_vector();
  const auto pb = b.probs.to_vector();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i] == pb[i]);
}

TEST_CASE("checkpoint errors: fingerprint mismatch and corruption") {
  const std::string dir = temp_dir("ckpt_err");
  NetConfig a = tiny_net();
  PolicyNet net_a(a, 0);
  const std::string path = dir + "/a.ckpt.json";
  net_a.save(path);

  NetConfig b = tiny_net();
  b.scale_dims = {8};
  CHECK_THROWS_AS(load_checkpoint(path, NetConfig(b).fingerprint(), false),
                  std::runtime_error);
  // force skips the check
  CHECK_NOTHROW(load_checkpoint(path, NetConfig(b).fingerprint(), true));

  const std::string corrupt = dir + "/corrupt.ckpt.json";
  {
    std::FILE* f = std::fopen(corrupt.c_str(), "wb");
    std::fputs("{\"format_version\": 1, \"params\": [trunc", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_checkpoint(corrupt, "", false), std::runtime_error);
}

TEST_CASE("short training run is reproducible and improves validation") {
  TrainOptions opts;
  opts.net = tiny_net();
  opts.scheme = GenScheme::SD1;
  opts.n_jobs = 2;
  opts.n_machines = 2;
  opts.ppo.episodes = 16;
  opts.ppo.envs_per_batch = 4;
  opts.ppo.resample_every = 8;
  opts.ppo.validate_every = 4;
  opts.ppo.validation_instances = 10;
  opts.ppo.seed = 5;

  PolicyNet p1(opts.net, opts.ppo.seed);
  const TrainResult r1 = train(p1, opts);
  PolicyNet p2(opts.net, opts.ppo.seed);
  const TrainResult r2 = train(p2, opts);

  REQUIRE(r1.curve.size() == 4);  // 16 / 4 validations
  REQUIRE(r2.curve.size() == r1.curve.size());
  for (std::size_t i = 0; i < r1.curve.size(); ++i) {
    CHECK(r1.curve[i].episode == r2.curve[i].episode);
    CHECK(r1.curve[i].mean_val_makespan == r2.curve[i].mean_val_makespan);
  }
  CHECK(r1.best_val_makespan <= r1.final_val_makespan);
}

TEST_CASE("training schedule arithmetic") {
  // episodes / resample_every batches, episodes / validate_every validations.
  TrainOptions opts;
  opts.net = tiny_net();
  opts.n_jobs = 1;
  opts.n_machines = 1;
  opts.ppo.episodes = 20;
  opts.ppo.envs_per_batch = 2;
  opts.ppo.resample_every = 5;
  opts.ppo.validate_every = 10;
  opts.ppo.validation_instances = 4;
  opts.ppo.seed = 6;
  PolicyNet policy(opts.net, opts.ppo.seed);
  const TrainResult result = train(policy, opts);
  CHECK(result.curve.size() == 2);
  CHECK(result.curve[0].episode == 10);
  CHECK(result.curve[1].episode == 20);
}

TEST_CASE("PPO config JSON round trip mirrors field names") {
  PPOConfig cfg;
  cfg.gae_lambda = 0.2;
  cfg.episodes = 123;
  cfg.seed = 99;
  const PPOConfig back = PPOConfig::from_json(cfg.to_json());
  CHECK(back.gae_lambda == cfg.gae_lambda);
  CHECK(back.episodes == 123);
  CHECK(back.seed == 99);
  CHECK(cfg.to_json().find("\"gae_lambda\"") != std::string::npos);
  CHECK_THROWS(PPOConfig::from_json("{\"clip_eps\": 2.0}"));
}
