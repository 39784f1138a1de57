#include "fjsrl/ppo.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace fjsrl {

namespace {
// Stream index bases keep the RNG uses of one seed disjoint.
constexpr std::uint64_t kTrainBatchBase = 1ull << 40;
constexpr std::uint64_t kValidationBase = 2ull << 40;
constexpr std::uint64_t kRolloutBase = 3ull << 40;
}  // namespace

void PPOConfig::validate() const {
  if (!(gae_lambda > 0.0 && gae_lambda <= 1.0)) {
    throw std::invalid_argument("gae_lambda must be in (0, 1]");
  }
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) {
    throw std::invalid_argument("clip_eps must be in (0, 1)");
  }
  if (episodes < 1 || envs_per_batch < 1 || resample_every < 1 ||
      validate_every < 1 || epochs_per_update < 1) {
    throw std::invalid_argument("schedule counts must be >= 1");
  }
}

std::string PPOConfig::to_json() const {
  nlohmann::json doc{{"gamma", gamma},
                     {"gae_lambda", gae_lambda},
                     {"clip_eps", clip_eps},
                     {"epochs_per_update", epochs_per_update},
                     {"entropy_coef", entropy_coef},
                     {"value_coef", value_coef},
                     {"grad_clip_norm", grad_clip_norm},
                     {"lr", lr},
                     {"episodes", episodes},
                     {"envs_per_batch", envs_per_batch},
                     {"resample_every", resample_every},
                     {"validate_every", validate_every},
                     {"validation_instances", validation_instances},
                     {"seed", seed}};
  return doc.dump(2) + "\n";
}

PPOConfig PPOConfig::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& err) {
    throw std::runtime_error(std::string("bad PPO config: ") + err.what());
  }
  PPOConfig cfg;
  auto read = [&](const char* key, auto& out) {
    if (doc.contains(key)) doc.at(key).get_to(out);
  };
  read("gamma", cfg.gamma);
  read("gae_lambda", cfg.gae_lambda);
  read("clip_eps", cfg.clip_eps);
  read("epochs_per_update", cfg.epochs_per_update);
  read("entropy_coef", cfg.entropy_coef);
  read("value_coef", cfg.value_coef);
  read("grad_clip_norm", cfg.grad_clip_norm);
  read("lr", cfg.lr);
  read("episodes", cfg.episodes);
  read("envs_per_batch", cfg.envs_per_batch);
  read("resample_every", cfg.resample_every);
  read("validate_every", cfg.validate_every);
  read("validation_instances", cfg.validation_instances);
  read("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

Trajectory run_episode(PolicyNet& policy, const Instance& instance,
                       SelectMode mode, RngStream& rng) {
  Trajectory traj;
  EnvState state(instance);
  traj.initial_estimate = state.estimated_makespan();
  while (!state.done()) {
    Tape tape(false);
    TrajectoryStep step;
    step.features = state.extract_features();
    PolicyOutput out = policy.forward(tape, step.features);
    const int action = select_action(out.probs.to_vector(), out.flat_mask,
                                     mode, rng);
    const StepResult res = state.step(out.pair_at(action));
    step.action = action;
    step.reward = res.reward;
    step.log_prob = std::log(out.probs.value_at(action));
    step.value = out.value.scalar();
    step.done = res.done;
    traj.steps.push_back(std::move(step));
  }
  traj.final_makespan = makespan(state.schedule());
  return traj;
}

std::vector<Trajectory> collect_rollouts(PolicyNet& policy,
                                         const std::vector<Instance>& instances,
                                         SelectMode mode, std::uint64_t seed,
                                         std::uint64_t batch_tag) {
  std::vector<Trajectory> out;
  out.reserve(instances.size());
  for (std::size_t e = 0; e < instances.size(); ++e) {
    RngStream rng(seed, kRolloutBase + batch_tag * 4096 + e);
    out.push_back(run_episode(policy, instances[e], mode, rng));
  }
  return out;
}

void gae_advantages(const Trajectory& traj, double gamma, double lambda,
                    std::vector<double>& advantages,
                    std::vector<double>& returns) {
  const int n = static_cast<int>(traj.steps.size());
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
  double next_adv = 0.0;
  double next_value = 0.0;  // terminal bootstrap
  for (int t = n - 1; t >= 0; --t) {
    const TrajectoryStep& s = traj.steps[t];
    const double not_done = s.done ? 0.0 : 1.0;
    const double delta = s.reward + gamma * next_value * not_done - s.value;
    next_adv = delta + gamma * lambda * not_done * next_adv;
    advantages[t] = next_adv;
    returns[t] = next_adv + s.value;
    next_value = s.value;
  }
}

namespace {

struct FlatBatch {
  std::vector<const TrajectoryStep*> steps;
  std::vector<double> advantages;  // normalized
  std::vector<double> returns;
};

FlatBatch flatten(const std::vector<Trajectory>& batch, const PPOConfig& cfg) {
  FlatBatch flat;
  for (const Trajectory& traj : batch) {
    std::vector<double> adv, ret;
    gae_advantages(traj, cfg.gamma, cfg.gae_lambda, adv, ret);
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      flat.steps.push_back(&traj.steps[t]);
      flat.advantages.push_back(adv[t]);
      flat.returns.push_back(ret[t]);
    }
  }
  // Normalize advantages over the whole batch.
  const std::size_t n = flat.advantages.size();
  if (n == 0) throw std::invalid_argument("ppo_update on an empty batch");
  double mean = 0.0;
  for (double a : flat.advantages) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double a : flat.advantages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(n);
  const double denom = std::sqrt(var) + 1e-8;
  for (double& a : flat.advantages) a = (a - mean) / denom;
  return flat;
}

// One pass over the batch; accumulates mean-loss gradients when train=true.
LossReport run_epoch(PolicyNet& policy, const FlatBatch& flat,
                     const PPOConfig& cfg, bool train) {
  const std::size_t n = flat.steps.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  LossReport report;
  report.n_steps = static_cast<int>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TrajectoryStep& s = *flat.steps[i];
    Tape tape(train);
    PolicyOutput out = policy.forward(tape, s.features);

    const Tensor log_prob = tape.log(tape.pick(out.probs, s.action));
    const Tensor ratio =
        tape.exp(tape.add_scalar(log_prob, -s.log_prob));
    const double adv = flat.advantages[i];
    const Tensor surrogate = tape.minimum(
        tape.scale(ratio, adv),
        tape.scale(tape.clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps),
                   adv));
    const Tensor value_err = tape.add_scalar(out.value, -flat.returns[i]);
    const Tensor value_sq = tape.mul(value_err, value_err);
    const Tensor entropy = tape.masked_entropy(out.probs, out.flat_mask);

    const Tensor loss = tape.add(
        tape.scale(surrogate, -1.0),
        tape.add(tape.scale(value_sq, cfg.value_coef),
                 tape.scale(entropy, -cfg.entropy_coef)));

    report.actor_loss += -surrogate.scalar() * inv_n;
    report.value_loss += value_sq.scalar() * inv_n;
    report.entropy += entropy.scalar() * inv_n;
    report.total_loss += loss.scalar() * inv_n;

    if (train) tape.backward(loss, inv_n);
  }
  if (!std::isfinite(report.total_loss)) {
    throw std::runtime_error("PPO loss is not finite; aborting update");
  }
  return report;
}

}  // namespace

LossReport ppo_update(PolicyNet& policy, const std::vector<Trajectory>& batch,
                      const PPOConfig& cfg) {
  const FlatBatch flat = flatten(batch, cfg);
  LossReport last;
  AdamConfig adam;
  adam.lr = cfg.lr;
  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    policy.params().zero_grad();
    last = run_epoch(policy, flat, cfg, /*train=*/true);
    last.grad_norm = policy.params().grad_norm();
    policy.params().clip_grad_norm(cfg.grad_clip_norm);
    policy.params().adam_step(adam);
  }
  return last;
}

LossReport evaluate_batch_loss(PolicyNet& policy,
                               const std::vector<Trajectory>& batch,
                               const PPOConfig& cfg) {
  const FlatBatch flat = flatten(batch, cfg);
  return run_epoch(policy, flat, cfg, /*train=*/false);
}

namespace {

double greedy_validation(PolicyNet& policy,
                         const std::vector<Instance>& val_set) {
  double sum = 0.0;
  RngStream unused(0, 0);
  for (const Instance& inst : val_set) {
    const Trajectory traj =
        run_episode(policy, inst, SelectMode::Greedy, unused);
    sum += static_cast<double>(traj.final_makespan);
  }
  return sum / static_cast<double>(val_set.size());
}

}  // namespace

TrainResult train(PolicyNet& policy, const TrainOptions& options) {
  options.ppo.validate();
  const PPOConfig& cfg = options.ppo;

  GenConfig gen;
  gen.scheme = options.scheme;
  gen.n_jobs = options.n_jobs;
  gen.n_machines = options.n_machines;
  gen.seed = cfg.seed;

  std::vector<Instance> val_set;
  val_set.reserve(cfg.validation_instances);
  for (int i = 0; i < cfg.validation_instances; ++i) {
    val_set.push_back(generate_sd(gen, kValidationBase + i));
  }

  TrainResult result;
  std::ofstream curve_out;
  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    result.final_path = options.out_dir + "/final.ckpt.json";
    result.best_path = options.out_dir + "/best.ckpt.json";
    result.curve_path = options.out_dir + "/curve.jsonl";
    curve_out.open(result.curve_path, std::ios::binary);
  }

  std::vector<Instance> batch_instances;
  std::uint64_t instance_counter = 0;
  double best_val = std::numeric_limits<double>::infinity();
  // Keep an in-memory copy of the best parameters for when out_dir is unset.
  ParamStore best_params;

  for (int episode = 1; episode <= cfg.episodes; ++episode) {
    if ((episode - 1) % cfg.resample_every == 0) {
      batch_instances.clear();
      for (int e = 0; e < cfg.envs_per_batch; ++e) {
        batch_instances.push_back(
            generate_sd(gen, kTrainBatchBase + instance_counter++));
      }
    }
    const std::vector<Trajectory> batch = collect_rollouts(
        policy, batch_instances, SelectMode::Sampling, cfg.seed,
        static_cast<std::uint64_t>(episode));
    const LossReport report = ppo_update(policy, batch, cfg);

    if (episode % cfg.validate_every == 0) {
      const double val = greedy_validation(policy, val_set);
      result.curve.push_back({episode, val});
      if (curve_out.is_open()) {
        nlohmann::json rec{{"episode", episode}, {"mean_val_makespan", val}};
        curve_out << rec.dump() << '\n';
        curve_out.flush();
      }
      if (val < best_val) {
        best_val = val;
        best_params = policy.params();
        if (!result.best_path.empty()) policy.save(result.best_path);
      }
      if (!options.quiet) {
        std::cerr << "episode " << episode << " val " << val << " loss "
                  << report.total_loss << "\n";
      }
    }
  }

  result.final_val_makespan = greedy_validation(policy, val_set);
  if (!result.final_path.empty()) policy.save(result.final_path);
  if (result.curve.empty()) {
    // No validation ever ran; the final parameters are the best we know.
    best_val = result.final_val_makespan;
    best_params = policy.params();
    if (!result.best_path.empty()) policy.save(result.best_path);
  }
  result.best_val_makespan = best_val;
  if (options.restore_best) policy.params() = best_params;
  return result;
}

}  // namespace fjsrl
