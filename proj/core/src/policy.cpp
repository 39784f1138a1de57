#include "fjsrl/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace fjsrl {

const char* module_name(Module b) {
  switch (b) {
    case Module::Attn: return "attn";
    case Module::Conv: return "conv";
    case Module::CrossAttn: return "cattn";
  }
  return "?";
}

CandidatePair PolicyOutput::pair_at(int grid_index) const {
  if (grid_index < 0 || grid_index >= n_front * n_machines) {
    throw std::invalid_argument("grid index out of range");
  }
  const int row = front_rows[grid_index / n_machines];
  return CandidatePair{job_of_row[row], op_of_row[row],
                       grid_index % n_machines};
}

int PolicyOutput::grid_index_of(const CandidatePair& pair) const {
  for (int r = 0; r < n_front; ++r) {
    const int row = front_rows[r];
    if (job_of_row[row] == pair.job_id && op_of_row[row] == pair.op_index) {
      return r * n_machines + pair.machine_id;
    }
  }
  throw std::invalid_argument("pair is not on the decision grid");
}

PolicyNet::PolicyNet(NetConfig cfg, std::uint64_t init_seed)
    : cfg_(std::move(cfg)), repr_(cfg_) {
  cfg_.validate();
  repr_.declare_params(store_);
  declare_heads();
  RngStream rng(init_seed, 0x1717);
  repr_.init_params(store_, rng);
  init_heads(rng);
}

void PolicyNet::declare_heads() {
  for (int s = 0; s < cfg_.n_supervised_scales(); ++s) {
    const int d = cfg_.scale_dims[s];
    for (Module b : kModules) {
      const std::string ap =
          "s" + std::to_string(s) + ".actor." + module_name(b);
      const std::string cp =
          "s" + std::to_string(s) + ".critic." + module_name(b);
      int in = 6 * d;
      for (std::size_t l = 0; l < cfg_.actor_hidden.size(); ++l) {
        store_.create(ap + ".l" + std::to_string(l) + ".W",
                      {in, cfg_.actor_hidden[l]});
        store_.create(ap + ".l" + std::to_string(l) + ".b",
                      {1, cfg_.actor_hidden[l]});
        in = cfg_.actor_hidden[l];
      }
      store_.create(ap + ".out.W", {in, 1});
      store_.create(ap + ".out.b", {1, 1});

      in = 2 * d;
      for (std::size_t l = 0; l < cfg_.critic_hidden.size(); ++l) {
        store_.create(cp + ".l" + std::to_string(l) + ".W",
                      {in, cfg_.critic_hidden[l]});
        store_.create(cp + ".l" + std::to_string(l) + ".b",
                      {1, cfg_.critic_hidden[l]});
        in = cfg_.critic_hidden[l];
      }
      store_.create(cp + ".out.W", {in, 1});
      store_.create(cp + ".out.b", {1, 1});
    }
  }
}

void PolicyNet::init_heads(RngStream& rng) {
  // Hidden layers get scaled-uniform weights; the final layers stay zero so
  // the untrained policy is exactly uniform over feasible pairs and v = 0.
  for (Param& p : store_.params()) {
    const bool is_head = p.name.find(".actor.") != std::string::npos ||
                         p.name.find(".critic.") != std::string::npos;
    if (!is_head) continue;
    if (p.name.find(".out.") != std::string::npos) continue;
    if (p.name.back() == 'b') continue;
    const double limit = std::sqrt(6.0 / (p.shape[0] + p.shape[1]));
    for (double& w : p.value) w = rng.uniform_symmetric(limit);
  }
}

Tensor PolicyNet::mlp(Tape& tape, const std::string& prefix,
                      const Tensor& input,
                      const std::vector<int>& hidden) const {
  Tensor h = input;
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    const std::string lp = prefix + ".l" + std::to_string(l);
    h = tape.tanh(tape.add_rowwise(
        tape.matmul(h, store_.use(tape, lp + ".W")),
        store_.use(tape, lp + ".b")));
  }
  return tape.add_rowwise(tape.matmul(h, store_.use(tape, prefix + ".out.W")),
                          store_.use(tape, prefix + ".out.b"));
}

std::vector<RepSet> PolicyNet::representations(Tape& tape,
                                               const FeatureBundle& fb) {
  return repr_.forward(tape, store_, fb);
}

namespace {

void module_tensors(const RepSet& rep, Module b, Tensor& op, Tensor& ma) {
  switch (b) {
    case Module::Attn: op = rep.att_op; ma = rep.att_ma; break;
    case Module::Conv: op = rep.conv_op; ma = rep.conv_ma; break;
    case Module::CrossAttn: op = rep.cross_op; ma = rep.cross_ma; break;
  }
}

}  // namespace

Tensor PolicyNet::aggregate_pairs(Tape& tape, const FeatureBundle& fb,
                                  const std::vector<RepSet>& reps, Module b,
                                  int scale) {
  const int m = fb.n_machines;
  const int n_front = static_cast<int>(fb.front_rows.size());
  if (n_front == 0) throw std::invalid_argument("no candidate pairs to score");
  const int n_pairs = n_front * m;

  // Grid row/column index streams.
  std::vector<int> op_rows(n_pairs), ma_rows(n_pairs);
  for (int r = 0; r < n_front; ++r) {
    for (int j = 0; j < m; ++j) {
      op_rows[r * m + j] = fb.front_rows[r];
      ma_rows[r * m + j] = j;
    }
  }

  const RepSet& rep = reps.at(scale);
  Tensor mod_op, mod_ma;
  module_tensors(rep, b, mod_op, mod_ma);

  // Pooled context: eligible front ops and all machines.
  const Tensor pooled_op =
      tape.mean_rows(tape.gather_rows(mod_op, fb.front_rows));
  const Tensor pooled_ma = tape.mean_rows(mod_ma);

  return tape.concat_cols({
      tape.gather_rows(rep.h_op, op_rows),
      tape.gather_rows(rep.h_ma, ma_rows),
      tape.gather_rows(mod_op, op_rows),
      tape.gather_rows(mod_ma, ma_rows),
      tape.repeat_row(pooled_op, n_pairs),
      tape.repeat_row(pooled_ma, n_pairs),
  });
}

PolicyOutput PolicyNet::forward(Tape& tape, const FeatureBundle& fb) {
  const int m = fb.n_machines;
  const int n_front = static_cast<int>(fb.front_rows.size());
  if (n_front == 0) {
    throw std::invalid_argument("policy forward on a terminal state");
  }
  const std::vector<RepSet> reps = representations(tape, fb);

  PolicyOutput out;
  out.n_front = n_front;
  out.n_machines = m;
  out.front_rows = fb.front_rows;
  out.job_of_row = fb.job_of_row;
  out.op_of_row.resize(fb.n_ops);
  {
    int prev_job = -1, k = 0;
    for (int r = 0; r < fb.n_ops; ++r) {
      k = fb.job_of_row[r] == prev_job ? k + 1 : 0;
      prev_job = fb.job_of_row[r];
      out.op_of_row[r] = k;
    }
  }
  out.flat_mask = fb.pair_mask;

  Tensor logits;
  Tensor value;
  for (int s = 0; s < cfg_.n_supervised_scales(); ++s) {
    for (Module b : kModules) {
      const Tensor agg = aggregate_pairs(tape, fb, reps, b, s);
      const Tensor score = mlp(tape, "s" + std::to_string(s) + ".actor." +
                                         module_name(b),
                               agg, cfg_.actor_hidden);
      logits = logits.defined() ? tape.add(logits, score) : score;

      const RepSet& rep = reps[s];
      Tensor mod_op, mod_ma;
      module_tensors(rep, b, mod_op, mod_ma);
      const Tensor pooled = tape.concat_cols(
          {tape.mean_rows(tape.gather_rows(mod_op, fb.front_rows)),
           tape.mean_rows(mod_ma)});
      const Tensor v = mlp(tape, "s" + std::to_string(s) + ".critic." +
                                     module_name(b),
                           pooled, cfg_.critic_hidden);
      value = value.defined() ? tape.add(value, v) : v;
    }
  }
  out.logits = logits;
  out.probs = tape.masked_softmax(logits, fb.pair_mask);
  out.value = value;
  return out;
}

void PolicyNet::save(const std::string& path) const {
  save_checkpoint(store_, cfg_.fingerprint(), path);
}

PolicyNet PolicyNet::load(const std::string& path, bool force) {
  const std::string fp = checkpoint_fingerprint(path);
  PolicyNet net(NetConfig::from_fingerprint(fp), 0);
  ParamStore loaded = load_checkpoint(path, net.cfg_.fingerprint(), force);
  // Replace values by name; structure must match what the config declares.
  if (loaded.params().size() != net.store_.params().size()) {
    throw std::runtime_error("checkpoint parameter set does not match config");
  }
  for (Param& p : net.store_.params()) {
    const Param& src = loaded.at(p.name);
    if (src.shape != p.shape) {
      throw std::runtime_error("checkpoint shape mismatch for " + p.name);
    }
    p.value = src.value;
    p.m = src.m;
    p.v = src.v;
  }
  net.store_.set_adam_steps(loaded.adam_steps());
  return net;
}

int select_action(const std::vector<double>& probs,
                  const std::vector<unsigned char>& mask, SelectMode mode,
                  RngStream& rng) {
  const int n = static_cast<int>(probs.size());
  if (mode == SelectMode::Greedy) {
    int best = -1;
    for (int i = 0; i < n; ++i) {
      if (!mask[i]) continue;
      if (best < 0 || probs[i] > probs[best]) best = i;
    }
    if (best < 0) throw std::invalid_argument("no feasible action");
    return best;
  }
  const double u = rng.uniform_double();
  double acc = 0.0;
  int last_feasible = -1;
  for (int i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    last_feasible = i;
    acc += probs[i];
    if (u < acc) return i;
  }
  // Rounding can leave acc slightly below 1; fall back to the last cell.
  if (last_feasible < 0) throw std::invalid_argument("no feasible action");
  return last_feasible;
}

}  // namespace fjsrl
