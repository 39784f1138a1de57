#include "fjsrl/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fjsrl/baselines.hpp"
#include "fjsrl/gantt.hpp"
#include "fjsrl/instance_io.hpp"
#include "fjsrl/ppo.hpp"
#include "fjsrl/report.hpp"
#include "json.hpp"

namespace fjsrl {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << content;
  if (!out.good()) throw std::runtime_error("short write: " + path);
}

Instance load_instance_file(const std::string& path) {
  const std::string text = read_file(path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".fjs") {
    return parse_fjs_text(text);
  }
  return parse_instance(text);
}

struct GenArgs {
  std::string scheme = "sd1";
  int jobs = 10;
  int machines = 5;
  int count = 1;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
};

int cmd_gen(const GenArgs& a) {
  GenConfig cfg;
  cfg.scheme = parse_scheme(a.scheme);
  cfg.n_jobs = a.jobs;
  cfg.n_machines = a.machines;
  cfg.seed = a.seed;
  std::filesystem::create_directories(a.out);
  for (int i = 0; i < a.count; ++i) {
    const Instance inst = generate_sd(cfg, i);
    char name[128];
    std::snprintf(name, sizeof(name), "%s_%dx%d_%04d", a.scheme.c_str(),
                  a.jobs, a.machines, i);
    const std::string base = a.out + "/" + name;
    if (a.format == "fjs") {
      write_file(base + ".fjs", emit_fjs_text(inst));
    } else {
      write_file(base + ".json", serialize_instance(inst));
    }
  }
  std::cout << "wrote " << a.count << " " << a.scheme << " " << a.jobs << "x"
            << a.machines << " instances to " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string scheme = "sd1";
  int jobs = 10;
  int machines = 5;
  std::string config_path;
  std::string out = "runs/latest";
  std::string scales = "32,8";
  int heads = 4;
  bool no_attn = false, no_cattn = false, no_conv = false, no_deep = false;
  bool verbose = false;
  PPOConfig ppo;
  bool lambda_set = false;
  // Re-applies every PPO flag the user passed explicitly (set up at parse).
  std::vector<std::function<void(PPOConfig&)>> overrides;
};

NetConfig net_from_args(const TrainArgs& a) {
  NetConfig net;
  net.scale_dims.clear();
  std::stringstream ss(a.scales);
  for (std::string tok; std::getline(ss, tok, ',');) {
    net.scale_dims.push_back(std::stoi(tok));
  }
  net.n_heads = a.heads;
  net.use_attn = !a.no_attn;
  net.use_cattn = !a.no_cattn;
  net.use_conv = !a.no_conv;
  net.deep_supervision = !a.no_deep;
  net.validate();
  return net;
}

int cmd_train(TrainArgs& a) {
  if (!a.config_path.empty()) {
    // File provides the base config, explicitly passed flags win.
    PPOConfig merged = PPOConfig::from_json(read_file(a.config_path));
    for (const auto& apply : a.overrides) apply(merged);
    a.ppo = merged;
  }
  if (!a.lambda_set && a.config_path.empty() &&
      parse_scheme(a.scheme) == GenScheme::SD2) {
    a.ppo.gae_lambda = 0.2;  // the wide-duration scheme default
  }
  a.ppo.validate();

  TrainOptions opts;
  opts.ppo = a.ppo;
  opts.net = net_from_args(a);
  opts.scheme = parse_scheme(a.scheme);
  opts.n_jobs = a.jobs;
  opts.n_machines = a.machines;
  opts.out_dir = a.out;
  opts.quiet = !a.verbose;

  PolicyNet policy(opts.net, opts.ppo.seed);
  const TrainResult result = train(policy, opts);
  std::filesystem::create_directories(a.out);
  write_file(a.out + "/ppo_config.json", a.ppo.to_json());
  std::cout << "trained " << a.ppo.episodes << " episodes; best validation "
            << result.best_val_makespan << ", final "
            << result.final_val_makespan << "\n"
            << "checkpoints: " << result.best_path << ", " << result.final_path
            << "\n";
  return 0;
}

struct EvalArgs {
  std::vector<std::string> checkpoints;
  std::string data;
  std::string mode = "greedy";
  int samples = 100;
  std::uint64_t seed = 0;
  std::string reference;
  std::string out;
  bool force = false;
};

int cmd_eval(const EvalArgs& a) {
  const NamedInstances instances = load_instance_dir(a.data);
  std::map<std::string, double> reference;
  if (!a.reference.empty()) reference = load_reference_map(a.reference);
  const SelectMode mode =
      a.mode == "sampling" ? SelectMode::Sampling : SelectMode::Greedy;

  std::vector<double> means;
  std::string all_jsonl;
  for (const std::string& ckpt : a.checkpoints) {
    PolicyNet policy = PolicyNet::load(ckpt, a.force);
    RunReport report = evaluate_dataset(policy, instances, mode, a.samples,
                                        a.seed, reference);
    report.checkpoint = ckpt;
    std::cout << report.render_table();
    all_jsonl += report.to_jsonl();
    means.push_back(report.mean_makespan);
  }
  if (means.size() > 1) {
    double mean = 0.0;
    for (double v : means) mean += v;
    mean /= static_cast<double>(means.size());
    double var = 0.0;
    for (double v : means) var += (v - mean) * (v - mean);
    const double stdev = std::sqrt(var / static_cast<double>(means.size() - 1));
    char line[128];
    std::snprintf(line, sizeof(line),
                  "across %zu checkpoints: mean %.2f  std %.2f\n", means.size(),
                  mean, stdev);
    std::cout << line;
    nlohmann::json agg{{"record", "seed_aggregate"},
                       {"checkpoints", means.size()},
                       {"mean_makespan", mean},
                       {"std_makespan", stdev}};
    all_jsonl += agg.dump() + "\n";
  }
  if (!a.out.empty()) write_file(a.out, all_jsonl);
  return 0;
}

struct SolveArgs {
  std::string instance;
  std::string algo = "rule:spt";
  std::uint64_t seed = 0;
  long long node_limit = 50'000'000;
  bool force = false;
  std::string out;
};

int cmd_solve(const SolveArgs& a) {
  const Instance inst = load_instance_file(a.instance);
  Schedule schedule;
  if (a.algo == "exact") {
    if (inst.total_ops() > 10 && !a.force) {
      throw std::runtime_error(
          "exact solver is exponential and this instance has " +
          std::to_string(inst.total_ops()) +
          " operations (> 10); rerun with --force to try anyway");
    }
    const ExactResult res = exact_solve(inst, a.node_limit);
    schedule = res.schedule;
    std::cout << "makespan " << res.makespan
              << (res.optimal ? " (proven optimal, " : " (node limit hit, ")
              << res.nodes_expanded << " nodes)\n";
  } else if (a.algo.rfind("rule:", 0) == 0) {
    const DispatchRule rule = parse_rule(a.algo.substr(5));
    schedule = dispatch_solve(inst, rule, a.seed);
    std::cout << "makespan " << makespan(schedule) << " (" << rule_name(rule)
              << ")\n";
  } else {
    throw std::runtime_error("unknown algorithm '" + a.algo +
                             "'; use exact or rule:<spt|fifo-spt|mwkr-spt|random>");
  }
  if (!a.out.empty()) write_file(a.out, serialize_schedule(schedule));
  return 0;
}

int cmd_validate(const std::string& instance_path,
                 const std::string& schedule_path) {
  const Instance inst = load_instance_file(instance_path);
  const Schedule sched = parse_schedule(read_file(schedule_path));
  const std::vector<Violation> violations = validate_schedule(inst, sched);
  if (violations.empty()) {
    std::cout << "feasible; makespan " << makespan(sched) << "\n";
    return 0;
  }
  for (const Violation& v : violations) {
    std::cout << "violation: " << v.detail << "\n";
  }
  return 1;
}

int cmd_gantt(const std::string& instance_path, const std::string& schedule_path,
              const std::string& out_path) {
  const Instance inst = load_instance_file(instance_path);
  const Schedule sched = parse_schedule(read_file(schedule_path));
  write_file(out_path, emit_gantt(inst, sched));
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Flexible job-shop scheduling with an RL policy"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* sc_gen = app.add_subcommand("gen", "Generate synthetic instances");
  sc_gen->add_option("--scheme", gen.scheme, "sd1 or sd2")
      ->check(CLI::IsMember({"sd1", "sd2"}));
  sc_gen->add_option("--jobs", gen.jobs)->check(CLI::PositiveNumber);
  sc_gen->add_option("--machines", gen.machines)->check(CLI::PositiveNumber);
  sc_gen->add_option("--count", gen.count)->check(CLI::PositiveNumber);
  sc_gen->add_option("--seed", gen.seed);
  sc_gen->add_option("--out", gen.out, "Output directory")->required();
  sc_gen->add_option("--format", gen.format)->check(CLI::IsMember({"json", "fjs"}));

  TrainArgs tr;
  std::vector<std::pair<CLI::Option*, std::function<void(PPOConfig&)>>> ppo_opts;
  CLI::App* sc_train = app.add_subcommand("train", "Train a policy with PPO-Clip");
  sc_train->add_option("--scheme", tr.scheme)->check(CLI::IsMember({"sd1", "sd2"}));
  sc_train->add_option("--jobs", tr.jobs)->check(CLI::PositiveNumber);
  sc_train->add_option("--machines", tr.machines)->check(CLI::PositiveNumber);
  sc_train->add_option("--config", tr.config_path, "PPO config JSON file");
  sc_train->add_option("--out", tr.out, "Run output directory");
  auto ppo_option = [&](const char* flag, auto PPOConfig::* member,
                        const char* help = "") {
    CLI::Option* opt = sc_train->add_option(flag, tr.ppo.*member, help);
    ppo_opts.emplace_back(opt, [&tr, member](PPOConfig& cfg) {
      cfg.*member = tr.ppo.*member;
    });
    return opt;
  };
  ppo_option("--seed", &PPOConfig::seed);
  ppo_option("--episodes", &PPOConfig::episodes);
  ppo_option("--envs-per-batch", &PPOConfig::envs_per_batch);
  ppo_option("--resample-every", &PPOConfig::resample_every);
  ppo_option("--validate-every", &PPOConfig::validate_every);
  ppo_option("--val-instances", &PPOConfig::validation_instances);
  ppo_option("--gamma", &PPOConfig::gamma);
  auto* lam = ppo_option("--lambda", &PPOConfig::gae_lambda, "GAE lambda");
  ppo_option("--clip-eps", &PPOConfig::clip_eps);
  ppo_option("--epochs", &PPOConfig::epochs_per_update);
  ppo_option("--entropy-coef", &PPOConfig::entropy_coef);
  ppo_option("--value-coef", &PPOConfig::value_coef);
  ppo_option("--grad-clip", &PPOConfig::grad_clip_norm);
  ppo_option("--lr", &PPOConfig::lr);
  sc_train->add_option("--scales", tr.scales, "Comma-separated scale widths");
  sc_train->add_option("--heads", tr.heads);
  sc_train->add_flag("--no-attn", tr.no_attn);
  sc_train->add_flag("--no-cattn", tr.no_cattn);
  sc_train->add_flag("--no-conv", tr.no_conv);
  sc_train->add_flag("--no-deep-supervision", tr.no_deep);
  sc_train->add_flag("-v,--verbose", tr.verbose);

  EvalArgs ev;
  CLI::App* sc_eval = app.add_subcommand("eval", "Evaluate checkpoints on a dataset");
  sc_eval->add_option("--checkpoint", ev.checkpoints)->required()->expected(-1);
  sc_eval->add_option("--data", ev.data, "Instance directory")->required();
  sc_eval->add_option("--mode", ev.mode)->check(CLI::IsMember({"greedy", "sampling"}));
  sc_eval->add_option("--samples", ev.samples, "Rollouts per instance (sampling)");
  sc_eval->add_option("--seed", ev.seed);
  sc_eval->add_option("--reference", ev.reference, "name -> makespan JSON map");
  sc_eval->add_option("--out", ev.out, "Write line-delimited report here");
  sc_eval->add_flag("--force", ev.force, "Ignore fingerprint mismatch");

  SolveArgs so;
  CLI::App* sc_solve = app.add_subcommand("solve", "Solve one instance");
  sc_solve->add_option("--instance", so.instance)->required();
  sc_solve->add_option("--algo", so.algo,
                       "exact or rule:<spt|fifo-spt|mwkr-spt|random>");
  sc_solve->add_option("--seed", so.seed);
  sc_solve->add_option("--node-limit", so.node_limit);
  sc_solve->add_flag("--force", so.force, "Run exact on large instances");
  sc_solve->add_option("--out", so.out, "Write schedule JSON here");

  std::string va_instance, va_schedule;
  CLI::App* sc_validate = app.add_subcommand("validate", "Check schedule feasibility");
  sc_validate->add_option("--instance", va_instance)->required();
  sc_validate->add_option("--schedule", va_schedule)->required();

  std::string ga_instance, ga_schedule, ga_out;
  CLI::App* sc_gantt = app.add_subcommand("gantt", "Render a schedule as SVG");
  sc_gantt->add_option("--instance", ga_instance)->required();
  sc_gantt->add_option("--schedule", ga_schedule)->required();
  sc_gantt->add_option("--out", ga_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    tr.lambda_set = lam->count() > 0;
    for (const auto& [opt, apply] : ppo_opts) {
      if (opt->count() > 0) tr.overrides.push_back(apply);
    }
    if (sc_gen->parsed()) return cmd_gen(gen);
    if (sc_train->parsed()) return cmd_train(tr);
    if (sc_eval->parsed()) return cmd_eval(ev);
    if (sc_solve->parsed()) return cmd_solve(so);
    if (sc_validate->parsed()) return cmd_validate(va_instance, va_schedule);
    if (sc_gantt->parsed()) return cmd_gantt(ga_instance, ga_schedule, ga_out);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 2;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.push_back("fjsrl");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const std::string& s : full) argv.push_back(s.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace fjsrl
