#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fjsrl/env.hpp"
#include "fjsrl/param_store.hpp"
#include "fjsrl/rng.hpp"
#include "fjsrl/tensor.hpp"

namespace fjsrl {

// Network architecture switches. The module flags correspond to the
// ablation axes: attn (a), cross-attn (x), conv (c), deep supervision (s).
// Disabled representation modules become identity pass-throughs; with deep
// supervision off only scale 1 carries actor/critic heads.
struct NetConfig {
  std::vector<int> scale_dims{32, 8};
  int n_heads = 4;
  bool use_attn = true;
  bool use_cattn = true;
  bool use_conv = true;
  bool deep_supervision = true;
  std::vector<int> actor_hidden{64, 32};
  std::vector<int> critic_hidden{64, 32};
  int op_features = FeatureBundle::kOpFeatures;
  int ma_features = FeatureBundle::kMachineFeatures;

  int n_scales() const { return static_cast<int>(scale_dims.size()); }
  int n_supervised_scales() const { return deep_supervision ? n_scales() : 1; }
  void validate() const;

  // Canonical JSON string; doubles as the checkpoint fingerprint.
  std::string fingerprint() const;
  static NetConfig from_fingerprint(const std::string& text);

  bool operator==(const NetConfig&) const = default;
};

// Per-scale representations for ops and machines at every stage of the
// pipeline: raw embeddings, after self-attention, after convolution, after
// cross-attention. Disabled stages alias the previous tensor.
struct RepSet {
  Tensor h_op, h_ma;
  Tensor att_op, att_ma;
  Tensor conv_op, conv_ma;
  Tensor cross_op, cross_ma;
};

// Representation learning half of the network: declares its parameters in a
// ParamStore and maps a FeatureBundle to one RepSet per scale.
class ReprNet {
 public:
  explicit ReprNet(NetConfig cfg);

  const NetConfig& config() const { return cfg_; }

  void declare_params(ParamStore& store) const;

  // Scaled-uniform init for every weight it declared (biases stay zero).
  void init_params(ParamStore& store, RngStream& rng) const;

  std::vector<RepSet> forward(Tape& tape, ParamStore& store,
                              const FeatureBundle& fb) const;

 private:
  Tensor multihead_attention(Tape& tape, ParamStore& store,
                             const std::string& prefix, const Tensor& queries,
                             const Tensor& keys,
                             std::shared_ptr<const std::vector<std::vector<int>>>
                                 neighbors) const;
  Tensor conv_block(Tape& tape, ParamStore& store, const std::string& prefix,
                    const Tensor& input) const;

  NetConfig cfg_;
};

// Intra-entity graphs: ops chain within each job (predecessor/successor plus
// self-loop); machines form a complete graph with self-loops.
std::shared_ptr<const std::vector<std::vector<int>>> op_graph(
    const std::vector<int>& job_of_row);
std::shared_ptr<const std::vector<std::vector<int>>> complete_graph(int n);
// Every one of n_query queries attends over all n_key keys.
std::shared_ptr<const std::vector<std::vector<int>>> bipartite_all(
    int n_query, int n_key);

}  // namespace fjsrl
