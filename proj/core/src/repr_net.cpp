#include "fjsrl/repr_net.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace fjsrl {

void NetConfig::validate() const {
  if (scale_dims.empty() || scale_dims.size() > 8) {
    throw std::invalid_argument("need between 1 and 8 scales");
  }
  for (int d : scale_dims) {
    if (d < n_heads || d % n_heads != 0) {
      throw std::invalid_argument("scale dims must be divisible by head count");
    }
  }
  if (n_heads < 1) throw std::invalid_argument("need >= 1 attention head");
  if (actor_hidden.empty() || critic_hidden.empty()) {
    throw std::invalid_argument("actor/critic hidden layer lists are empty");
  }
}

std::string NetConfig::fingerprint() const {
  nlohmann::json doc{{"scale_dims", scale_dims},
                     {"n_heads", n_heads},
                     {"use_attn", use_attn},
                     {"use_cattn", use_cattn},
                     {"use_conv", use_conv},
                     {"deep_supervision", deep_supervision},
                     {"actor_hidden", actor_hidden},
                     {"critic_hidden", critic_hidden},
                     {"op_features", op_features},
                     {"ma_features", ma_features}};
  return doc.dump();
}

NetConfig NetConfig::from_fingerprint(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& err) {
    throw std::runtime_error(std::string("bad network fingerprint: ") + err.what());
  }
  NetConfig cfg;
  doc.at("scale_dims").get_to(cfg.scale_dims);
  doc.at("n_heads").get_to(cfg.n_heads);
  doc.at("use_attn").get_to(cfg.use_attn);
  doc.at("use_cattn").get_to(cfg.use_cattn);
  doc.at("use_conv").get_to(cfg.use_conv);
  doc.at("deep_supervision").get_to(cfg.deep_supervision);
  doc.at("actor_hidden").get_to(cfg.actor_hidden);
  doc.at("critic_hidden").get_to(cfg.critic_hidden);
  doc.at("op_features").get_to(cfg.op_features);
  doc.at("ma_features").get_to(cfg.ma_features);
  cfg.validate();
  return cfg;
}

ReprNet::ReprNet(NetConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

namespace {

std::string scale_prefix(int s) { return "s" + std::to_string(s); }

void declare_linear(ParamStore& store, const std::string& prefix, int in,
                    int out) {
  store.create(prefix + ".W", {in, out});
  store.create(prefix + ".b", {1, out});
}

void declare_attention(ParamStore& store, const std::string& prefix, int dim,
                       int heads) {
  const int dh = dim / heads;
  for (int h = 0; h < heads; ++h) {
    const std::string hp = prefix + ".h" + std::to_string(h);
    store.create(hp + ".W", {dim, dh});
    store.create(hp + ".a_src", {dh, 1});
    store.create(hp + ".a_dst", {dh, 1});
  }
}

}  // namespace

void ReprNet::declare_params(ParamStore& store) const {
  for (int s = 0; s < cfg_.n_scales(); ++s) {
    const int d = cfg_.scale_dims[s];
    const std::string sp = scale_prefix(s);
    declare_linear(store, sp + ".embed.op", cfg_.op_features, d);
    declare_linear(store, sp + ".embed.ma", cfg_.ma_features, d);
    if (cfg_.use_attn) {
      declare_attention(store, sp + ".attn.op", d, cfg_.n_heads);
      declare_attention(store, sp + ".attn.ma", d, cfg_.n_heads);
    }
    if (cfg_.use_conv) {
      for (const char* side : {"op", "ma"}) {
        for (int layer = 0; layer < 2; ++layer) {
          const std::string cp = sp + ".conv." + side + ".l" + std::to_string(layer);
          store.create(cp + ".K", {d, d, 3});
          store.create(cp + ".b", {1, d});
        }
      }
    }
    if (cfg_.use_cattn) {
      declare_attention(store, sp + ".cattn.op2ma", d, cfg_.n_heads);
      declare_attention(store, sp + ".cattn.ma2op", d, cfg_.n_heads);
    }
  }
}

void ReprNet::init_params(ParamStore& store, RngStream& rng) const {
  for (int s = 0; s < cfg_.n_scales(); ++s) {
    const std::string sp = scale_prefix(s);
    for (Param& p : store.params()) {
      if (p.name.rfind(sp + ".", 0) != 0) continue;
      if (p.name.find(".actor.") != std::string::npos ||
          p.name.find(".critic.") != std::string::npos) {
        continue;  // heads are initialized by their owner
      }
      if (p.name.back() == 'b') continue;  // biases stay zero
      // Fan-in/fan-out from the first two dims (kernels count taps as fan).
      double fan_in = p.shape[0];
      double fan_out = p.shape.size() > 1 ? p.shape[1] : 1;
      if (p.shape.size() == 3) {
        fan_in = static_cast<double>(p.shape[1]) * p.shape[2];
        fan_out = static_cast<double>(p.shape[0]) * p.shape[2];
      }
      const double limit = std::sqrt(6.0 / (fan_in + fan_out));
      for (double& w : p.value) w = rng.uniform_symmetric(limit);
    }
  }
}

Tensor ReprNet::multihead_attention(
    Tape& tape, ParamStore& store, const std::string& prefix,
    const Tensor& queries, const Tensor& keys,
    std::shared_ptr<const std::vector<std::vector<int>>> neighbors) const {
  std::vector<Tensor> heads;
  heads.reserve(cfg_.n_heads);
  for (int h = 0; h < cfg_.n_heads; ++h) {
    const std::string hp = prefix + ".h" + std::to_string(h);
    const Tensor w = store.use(tape, hp + ".W");
    const Tensor wq = tape.matmul(queries, w);
    // Self-attention passes queries == keys; avoid the duplicate projection.
    const Tensor wk = (&queries == &keys) ? wq : tape.matmul(keys, w);
    const Tensor q_score = tape.matmul(wq, store.use(tape, hp + ".a_src"));
    const Tensor k_score = tape.matmul(wk, store.use(tape, hp + ".a_dst"));
    heads.push_back(tape.attention_pool(q_score, k_score, wk, neighbors));
  }
  return tape.elu(tape.concat_cols(heads));
}

Tensor ReprNet::conv_block(Tape& tape, ParamStore& store,
                           const std::string& prefix,
                           const Tensor& input) const {
  const Tensor mid = tape.tanh(
      tape.conv1d(input, store.use(tape, prefix + ".l0.K"),
                  store.use(tape, prefix + ".l0.b")));
  return tape.conv1d(mid, store.use(tape, prefix + ".l1.K"),
                     store.use(tape, prefix + ".l1.b"));
}

std::vector<RepSet> ReprNet::forward(Tape& tape, ParamStore& store,
                                     const FeatureBundle& fb) const {
  const Tensor x_op = tape.input({fb.n_ops, cfg_.op_features}, fb.x_op);
  const Tensor x_ma = tape.input({fb.n_machines, cfg_.ma_features}, fb.x_ma);

  const auto ops_nbrs = op_graph(fb.job_of_row);
  const auto ma_nbrs = complete_graph(fb.n_machines);
  const auto op2ma = bipartite_all(fb.n_ops, fb.n_machines);
  const auto ma2op = bipartite_all(fb.n_machines, fb.n_ops);

  std::vector<RepSet> reps;
  reps.reserve(cfg_.n_scales());
  for (int s = 0; s < cfg_.n_scales(); ++s) {
    const std::string sp = scale_prefix(s);
    RepSet rep;
    rep.h_op = tape.elu(tape.add_rowwise(
        tape.matmul(x_op, store.use(tape, sp + ".embed.op.W")),
        store.use(tape, sp + ".embed.op.b")));
    rep.h_ma = tape.elu(tape.add_rowwise(
        tape.matmul(x_ma, store.use(tape, sp + ".embed.ma.W")),
        store.use(tape, sp + ".embed.ma.b")));

    if (cfg_.use_attn) {
      rep.att_op = multihead_attention(tape, store, sp + ".attn.op", rep.h_op,
                                       rep.h_op, ops_nbrs);
      rep.att_ma = multihead_attention(tape, store, sp + ".attn.ma", rep.h_ma,
                                       rep.h_ma, ma_nbrs);
    } else {
      rep.att_op = rep.h_op;
      rep.att_ma = rep.h_ma;
    }

    if (cfg_.use_conv) {
      rep.conv_op = conv_block(tape, store, sp + ".conv.op", rep.att_op);
      rep.conv_ma = conv_block(tape, store, sp + ".conv.ma", rep.att_ma);
    } else {
      rep.conv_op = rep.att_op;
      rep.conv_ma = rep.att_ma;
    }

    if (cfg_.use_cattn) {
      rep.cross_op = multihead_attention(tape, store, sp + ".cattn.op2ma",
                                         rep.conv_op, rep.conv_ma, op2ma);
      rep.cross_ma = multihead_attention(tape, store, sp + ".cattn.ma2op",
                                         rep.conv_ma, rep.conv_op, ma2op);
    } else {
      rep.cross_op = rep.conv_op;
      rep.cross_ma = rep.conv_ma;
    }
    reps.push_back(std::move(rep));
  }
  return reps;
}

std::shared_ptr<const std::vector<std::vector<int>>> op_graph(
    const std::vector<int>& job_of_row) {
  const int n = static_cast<int>(job_of_row.size());
  auto nbrs = std::make_shared<std::vector<std::vector<int>>>(n);
  for (int r = 0; r < n; ++r) {
    std::vector<int>& list = (*nbrs)[r];
    if (r > 0 && job_of_row[r - 1] == job_of_row[r]) list.push_back(r - 1);
    list.push_back(r);
    if (r + 1 < n && job_of_row[r + 1] == job_of_row[r]) list.push_back(r + 1);
  }
  return nbrs;
}

std::shared_ptr<const std::vector<std::vector<int>>> complete_graph(int n) {
  auto nbrs = std::make_shared<std::vector<std::vector<int>>>(n);
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  for (int i = 0; i < n; ++i) (*nbrs)[i] = all;
  return nbrs;
}

std::shared_ptr<const std::vector<std::vector<int>>> bipartite_all(int n_query,
                                                                   int n_key) {
  auto nbrs = std::make_shared<std::vector<std::vector<int>>>(n_query);
  std::vector<int> all(n_key);
  for (int i = 0; i < n_key; ++i) all[i] = i;
  for (int i = 0; i < n_query; ++i) (*nbrs)[i] = all;
  return nbrs;
}

}  // namespace fjsrl
