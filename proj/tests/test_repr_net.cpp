#include "doctest.h"

#include <cmath>

#include "fjsrl/instance_io.hpp"
#include "fjsrl/repr_net.hpp"
#include "oracles.hpp"

using namespace fjsrl;

namespace {

FeatureBundle bundle_for(const Instance& inst) {
  return EnvState(inst).extract_features();
}

NetConfig small_config() {
  NetConfig cfg;
  cfg.scale_dims = {8, 4};
  cfg.n_heads = 4;
  return cfg;
}

}  // namespace

TEST_CASE("zero embed weights give zero embeddings") {
  NetConfig cfg = small_config();
  ReprNet net(cfg);
  ParamStore store;
  net.declare_params(store);  // everything starts at zero

  const Instance inst = oracle::tiny_oracle_instance();
  Tape tape(false);
  const auto reps = net.forward(tape, store, bundle_for(inst));
  REQUIRE(reps.size() == 2);
  for (double v : reps[0].h_op.to_vector()) CHECK(v == 0.0);
  for (double v : reps[0].h_ma.to_vector()) CHECK(v == 0.0);
}

TEST_CASE("identical features give identical embeddings") {
  // Two one-op jobs with the same durations produce identical feature rows.
  const Instance inst =
      oracle::make_instance(2, {{{{0, 4}, {1, 6}}}, {{{0, 4}, {1, 6}}}});
  NetConfig cfg = small_config();
  ReprNet net(cfg);
  ParamStore store;
  net.declare_params(store);
  RngStream rng(5, 0);
  net.init_params(store, rng);

  Tape tape(false);
  const auto reps = net.forward(tape, store, bundle_for(inst));
  const auto h = reps[0].h_op.to_vector();
  const int d = reps[0].h_op.cols();
  for (int c = 0; c < d; ++c) CHECK(h[c] == h[d + c]);
}

TEST_CASE("representation shapes follow the scale dims") {
  GenConfig gen;
  gen.n_jobs = 6;
  gen.n_machines = 4;
  gen.seed = 2;
  const Instance inst = generate_sd(gen, 0);
  NetConfig cfg;  // default 32, 8
  ReprNet net(cfg);
  ParamStore store;
  net.declare_params(store);
  RngStream rng(5, 1);
  net.init_params(store, rng);

  Tape tape(false);
  const FeatureBundle fb = bundle_for(inst);
  const auto reps = net.forward(tape, store, fb);
  REQUIRE(reps.size() == 2);
  CHECK(reps[0].h_op.rows() == inst.total_ops());
  CHECK(reps[0].h_op.cols() == 32);
  CHECK(reps[0].cross_ma.rows() == 4);
  CHECK(reps[0].cross_ma.cols() == 32);
  CHECK(reps[1].cross_op.cols() == 8);
  for (const RepSet& rep : reps) {
    for (const Tensor* t : {&rep.h_op, &rep.att_op, &rep.conv_op, &rep.cross_op,
                            &rep.h_ma, &rep.att_ma, &rep.conv_ma, &rep.cross_ma}) {
      for (double v : t->to_vector()) CHECK(std::isfinite(v));
    }
  }
}

TEST_CASE("single node with self loop reproduces its own head values") {
  // One op, one machine: the op attends only to itself.
  const Instance inst = oracle::make_instance(1, {{{{0, 5}}}});
  NetConfig cfg = small_config();
  cfg.use_conv = false;
  cfg.use_cattn = false;
  ReprNet net(cfg);
  ParamStore store;
  net.declare_params(store);
  RngStream rng(8, 0);
  net.init_params(store, rng);

  Tape tape(false);
  const FeatureBundle fb = bundle_for(inst);
  const auto reps = net.forward(tape, store, fb);

  // With a single neighbor the attention weight is 1, so each head output
  // is exactly W h; reconstruct by hand.
  const int d = cfg.scale_dims[0];
  const int dh = d / cfg.n_heads;
  const auto h = reps[0].h_op.to_vector();
  std::vector<double> expected;
  for (int head = 0; head < cfg.n_heads; ++head) {
    const Param& w = store.at("s0.attn.op.h" + std::to_string(head) + ".W");
    for (int c = 0; c < dh; ++c) {
      double acc = 0.0;
      for (int r = 0; r < d; ++r) acc += h[r] * w.value[r * dh + c];
      expected.push_back(acc);
    }
  }
  const auto got = reps[0].att_op.to_vector();
  REQUIRE(got.size() == expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    const double e = expected[i] > 0.0 ? expected[i] : std::expm1(expected[i]);
    CHECK(got[i] == doctest::Approx(e).epsilon(1e-12));
  }
}

TEST_CASE("machine permutation equivariance without conv") {
  // Conv is order-dependent by construction, so check the conv-disabled
  // pipeline: permuting machine rows permutes machine outputs and leaves op
  // outputs unchanged.
  const Instance inst = oracle::make_instance(
      3, {{{{0, 3}, {1, 5}, {2, 4}}, {{1, 2}}}, {{{0, 7}, {2, 2}}}});
  NetConfig cfg = small_config();
  cfg.use_conv = false;
  ReprNet net(cfg);
  ParamStore store;
  net.declare_params(store);
  RngStream rng(13, 0);
  net.init_params(store, rng);

  FeatureBundle fb = bundle_for(inst);
  Tape tape(false);
  const auto reps = net.forward(tape, store, fb);

  // Swap machine rows 0 and 2 in the features.
  FeatureBundle permuted = fb;
  for (int f = 0; f < FeatureBundle::kMachineFeatures; ++f) {
    std::swap(permuted.x_ma[0 * FeatureBundle::kMachineFeatures + f],
              permuted.x_ma[2 * FeatureBundle::kMachineFeatures + f]);
  }
  const auto reps_p = net.forward(tape, store, permuted);

  const auto ma = reps[0].cross_ma.to_vector();
  const auto ma_p = reps_p[0].cross_ma.to_vector();
  const int d = cfg.scale_dims[0];
  for (int c = 0; c < d; ++c) {
    CHECK(ma_p[0 * d + c] == doctest::Approx(ma[2 * d + c]).epsilon(1e-12));
    CHECK(ma_p[2 * d + c] == doctest::Approx(ma[0 * d + c]).epsilon(1e-12));
    CHECK(ma_p[1 * d + c] == doctest::Approx(ma[1 * d + c]).epsilon(1e-12));
  }
  const auto op = reps[0].cross_op.to_vector();
  const auto op_p = reps_p[0].cross_op.to_vector();
  for (std::size_t i = 0; i < op.size(); ++i) {
    CHECK(op_p[i] == doctest::Approx(op[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv block with identity kernels reproduces tanh of its input") {
  const Instance inst = oracle::tiny_oracle_instance();
  NetConfig cfg = small_config();
  cfg.use_attn = false;
  cfg.use_cattn = false;
  ReprNet net(cfg);
  ParamStore store;
  net.declare_params(store);
  RngStream rng(3, 0);
  net.init_params(store, rng);

  // Overwrite both conv layers with centered identity kernels, zero bias.
  const int d = cfg.scale_dims[0];
  for (const char* layer : {"l0", "l1"}) {
    Param& k = store.at(std::string("s0.conv.op.") + layer + ".K");
    std::fill(k.value.begin(), k.value.end(), 0.0);
    for (int o = 0; o < d; ++o) k.value[(o * d + o) * 3 + 1] = 1.0;
    Param& b = store.at(std::string("s0.conv.op.") + layer + ".b");
    std::fill(b.value.begin(), b.value.end(), 0.0);
  }

  Tape tape(false);
  const auto reps = net.forward(tape, store, bundle_for(inst));
  const auto in = reps[0].att_op.to_vector();  // = h_op (attn disabled)
  const auto out = reps[0].conv_op.to_vector();
  REQUIRE(in.size() == out.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    CHECK(out[i] == doctest::Approx(std::tanh(in[i])).epsilon(1e-12));
  }
}

TEST_CASE("conv output length equals input length down to one entity") {
  NetConfig cfg = small_config();
  ReprNet net(cfg);
  ParamStore store;
  net.declare_params(store);
  RngStream rng(19, 0);
  net.init_params(store, rng);
  for (int ops : {1, 2, 7}) {
    std::vector<std::vector<std::map<int, int>>> jobs(1);
    for (int k = 0; k < ops; ++k) jobs[0].push_back({{0, k + 1}});
    const Instance inst = oracle::make_instance(1, jobs);
    Tape tape(false);
    const auto reps = net.forward(tape, store, bundle_for(inst));
    CHECK(reps[0].conv_op.rows() == ops);
  }
}

TEST_CASE("one op one machine cross attention is the projected machine value") {
  const Instance inst = oracle::make_instance(1, {{{{0, 5}}}});
  NetConfig cfg = small_config();
  cfg.use_attn = false;
  cfg.use_conv = false;
  ReprNet net(cfg);
  ParamStore store;
  net.declare_params(store);
  RngStream rng(29, 0);
  net.init_params(store, rng);

  Tape tape(false);
  const auto reps = net.forward(tape, store, bundle_for(inst));
  const int d = cfg.scale_dims[0];
  const int dh = d / cfg.n_heads;
  const auto hma = reps[0].h_ma.to_vector();
  std::vector<double> expected;
  for (int head = 0; head < cfg.n_heads; ++head) {
    const Param& w = store.at("s0.cattn.op2ma.h" + std::to_string(head) + ".W");
    for (int c = 0; c < dh; ++c) {
      double acc = 0.0;
      for (int r = 0; r < d; ++r) acc += hma[r] * w.value[r * dh + c];
      expected.push_back(acc);
    }
  }
  const auto got = reps[0].cross_op.to_vector();
  for (std::size_t i = 0; i < got.size(); ++i) {
    const double e = expected[i] > 0.0 ? expected[i] : std::expm1(expected[i]);
    CHECK(got[i] == doctest::Approx(e).epsilon(1e-12));
  }
}

TEST_CASE("disabled modules pass through their input") {
  const Instance inst = oracle::tiny_oracle_instance();
  NetConfig cfg = small_config();
  cfg.use_attn = false;
  cfg.use_conv = false;
  cfg.use_cattn = false;
  ReprNet net(cfg);
  ParamStore store;
  net.declare_params(store);
  RngStream rng(31, 0);
  net.init_params(store, rng);

  Tape tape(false);
  const auto reps = net.forward(tape, store, bundle_for(inst));
  CHECK(reps[0].att_op.to_vector() == reps[0].h_op.to_vector());
  CHECK(reps[0].conv_op.to_vector() == reps[0].h_op.to_vector());
  CHECK(reps[0].cross_op.to_vector() == reps[0].h_op.to_vector());
  CHECK(reps[0].cross_ma.to_vector() == reps[0].h_ma.to_vector());
}

TEST_CASE("repr pipeline gradient check") {
  const Instance inst = oracle::tiny_oracle_instance();
  NetConfig cfg;
  cfg.scale_dims = {8};
  ReprNet net(cfg);
  ParamStore store;
  net.declare_params(store);
  RngStream rng(41, 0);
  net.init_params(store, rng);
  const FeatureBundle fb = bundle_for(inst);

  auto loss_of = [&](bool record) {
    Tape tape(record);
    const auto reps = net.forward(tape, store, fb);
    const Tensor total = tape.add(tape.sum_all(tape.tanh(reps[0].cross_op)),
                                  tape.sum_all(tape.tanh(reps[0].cross_ma)));
    if (record) tape.backward(total);
    return total.scalar();
  };
  store.zero_grad();
  loss_of(true);
  for (Param& p : store.params()) {
    const double err = oracle::max_grad_rel_err(
        p.value.data(), p.grad.data(), static_cast<int>(p.value.size()),
        [&]() { return loss_of(false); });
    INFO(p.name);
    CHECK(err <= 1e-5);
  }
}

TEST_CASE("config fingerprint round trips") {
  NetConfig cfg;
  cfg.scale_dims = {16, 4};
  cfg.use_conv = false;
  cfg.deep_supervision = false;
  const NetConfig back = NetConfig::from_fingerprint(cfg.fingerprint());
  CHECK(back == cfg);
  CHECK(back.fingerprint() == cfg.fingerprint());
}

TEST_CASE("config validation rejects bad shapes") {
  NetConfig cfg;
  cfg.scale_dims = {30};  // not divisible by 4 heads
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.scale_dims = {};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.scale_dims = {8, 8, 8, 8, 8, 8, 8, 8, 8};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
