#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fjsrl/env.hpp"
#include "fjsrl/instance.hpp"
#include "fjsrl/instance_io.hpp"
#include "fjsrl/policy.hpp"

namespace fjsrl {

struct PPOConfig {
  double gamma = 1.0;
  double gae_lambda = 0.05;  // the SD2 runs use 0.2
  double clip_eps = 0.2;
  int epochs_per_update = 4;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double grad_clip_norm = 1.0;
  double lr = 3e-4;
  int episodes = 1000;
  int envs_per_batch = 20;
  int resample_every = 20;
  int validate_every = 10;
  int validation_instances = 100;
  std::uint64_t seed = 0;

  void validate() const;
  std::string to_json() const;
  static PPOConfig from_json(const std::string& text);
};

// One full episode: everything needed to replay the policy decisions.
struct TrajectoryStep {
  FeatureBundle features;
  int action = 0;  // flat grid index
  double reward = 0.0;
  double log_prob = 0.0;
  double value = 0.0;
  bool done = false;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  long long final_makespan = 0;
  double initial_estimate = 0.0;
};

// Runs one episode; Sampling draws from the stochastic policy, Greedy takes
// the argmax. The trajectory records per-step features, actions, rewards,
// old log-probs and values.
Trajectory run_episode(PolicyNet& policy, const Instance& instance,
                       SelectMode mode, RngStream& rng);

std::vector<Trajectory> collect_rollouts(PolicyNet& policy,
                                         const std::vector<Instance>& instances,
                                         SelectMode mode, std::uint64_t seed,
                                         std::uint64_t batch_tag);

// delta_t = r_t + gamma * v_{ t+1 } * (1 - done) - v_t, advantages by the
// usual exponentially weighted recursion, returns = advantages + values.
void gae_advantages(const Trajectory& traj, double gamma, double lambda,
                    std::vector<double>& advantages,
                    std::vector<double>& returns);

struct LossReport {
  double actor_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double total_loss = 0.0;
  double grad_norm = 0.0;
  int n_steps = 0;
};

// One PPO-Clip update: epochs_per_update full-batch passes with normalized
// advantages, gradient-norm clipping, and an Adam step per epoch. Reports
// the last epoch's losses. Throws on a non-finite loss.
LossReport ppo_update(PolicyNet& policy, const std::vector<Trajectory>& batch,
                      const PPOConfig& cfg);

// Forward-only loss of the batch at the current parameters (for tests and
// diagnostics); uses the same normalization as ppo_update.
LossReport evaluate_batch_loss(PolicyNet& policy,
                               const std::vector<Trajectory>& batch,
                               const PPOConfig& cfg);

struct CurvePoint {
  int episode = 0;
  double mean_val_makespan = 0.0;
};

struct TrainOptions {
  PPOConfig ppo;
  NetConfig net;
  GenScheme scheme = GenScheme::SD1;
  int n_jobs = 10;
  int n_machines = 5;
  std::string out_dir;  // when set: final.ckpt.json, best.ckpt.json, curve.jsonl
  bool quiet = true;
  // Leave the best-validation parameters (not the final ones) in the policy
  // when training finishes.
  bool restore_best = false;
};

struct TrainResult {
  std::vector<CurvePoint> curve;
  double best_val_makespan = 0.0;
  double final_val_makespan = 0.0;
  std::string final_path;
  std::string best_path;
  std::string curve_path;
};

// The training loop: environments resampled every resample_every episodes,
// greedy validation every validate_every episodes on a frozen seed-derived
// set, best-validation checkpoint retained. Trains `policy` in place; the
// caller constructs it from options.net with the run seed.
TrainResult train(PolicyNet& policy, const TrainOptions& options);

}  // namespace fjsrl
