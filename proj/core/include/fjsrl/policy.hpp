#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fjsrl/env.hpp"
#include "fjsrl/param_store.hpp"
#include "fjsrl/repr_net.hpp"
#include "fjsrl/rng.hpp"
#include "fjsrl/tensor.hpp"

namespace fjsrl {

enum class Module { Attn = 0, Conv = 1, CrossAttn = 2 };
inline constexpr Module kModules[] = {Module::Attn, Module::Conv,
                                      Module::CrossAttn};
const char* module_name(Module b);

enum class SelectMode { Greedy, Sampling };

// One policy evaluation over the (front op x machine) decision grid, flat
// row-major: index = front_row * n_machines + machine. Infeasible cells keep
// probability exactly 0 through the masked softmax.
struct PolicyOutput {
  Tensor logits;  // P x 1
  Tensor probs;   // P x 1
  Tensor value;   // 1 x 1
  std::vector<unsigned char> flat_mask;
  int n_front = 0;
  int n_machines = 0;
  std::vector<int> front_rows;   // grid row -> op row
  std::vector<int> job_of_row;   // op row -> job
  std::vector<int> op_of_row;    // op row -> op index within job

  CandidatePair pair_at(int grid_index) const;
  int grid_index_of(const CandidatePair& pair) const;
};

// The full network: representation pipeline plus per-(module, scale) actor
// and critic heads. Heads exist for every module at each supervised scale;
// their scalar outputs sum into the pair logits and the state value.
class PolicyNet {
 public:
  PolicyNet(NetConfig cfg, std::uint64_t init_seed);

  const NetConfig& config() const { return cfg_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  int actor_summands() const { return 3 * cfg_.n_supervised_scales(); }

  PolicyOutput forward(Tape& tape, const FeatureBundle& fb);

  // Pieces of forward, exposed for white-box checks.
  std::vector<RepSet> representations(Tape& tape, const FeatureBundle& fb);
  // P x 6d pair matrix for one module at one scale (P = n_front * m).
  Tensor aggregate_pairs(Tape& tape, const FeatureBundle& fb,
                         const std::vector<RepSet>& reps, Module b, int scale);

  // Checkpoint integration: fingerprint = config fingerprint.
  void save(const std::string& path) const;
  static PolicyNet load(const std::string& path, bool force = false);

 private:
  Tensor mlp(Tape& tape, const std::string& prefix, const Tensor& input,
             const std::vector<int>& hidden) const;
  void declare_heads();
  void init_heads(RngStream& rng);

  NetConfig cfg_;
  ReprNet repr_;
  mutable ParamStore store_;
};

// Greedy: argmax with lowest-index tie break. Sampling: categorical draw.
// Returns the flat grid index of the chosen feasible cell.
int select_action(const std::vector<double>& probs,
                  const std::vector<unsigned char>& mask, SelectMode mode,
                  RngStream& rng);

}  // namespace fjsrl
