#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "fjsrl/tensor.hpp"

namespace fjsrl {

struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<double> m;  // Adam first moment
  std::vector<double> v;  // Adam second moment
};

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Named parameter tensors with persistent creation order plus Adam state.
// Addresses of Param entries are stable once created, so tapes can hold
// gradient-sink pointers across a training run.
class ParamStore {
 public:
  Param& create(const std::string& name, std::vector<int> shape);
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) > 0; }

  std::deque<Param>& params() { return params_; }
  const std::deque<Param>& params() const { return params_; }
  std::size_t total_values() const;

  void zero_grad();
  double grad_norm() const;
  // Scales all gradients down so the global norm is at most max_norm.
  void clip_grad_norm(double max_norm);
  void adam_step(const AdamConfig& cfg);
  std::int64_t adam_steps() const { return adam_steps_; }
  void set_adam_steps(std::int64_t t) { adam_steps_ = t; }

  // Tape helpers.
  Tensor use(Tape& tape, const std::string& name);

 private:
  std::deque<Param> params_;
  std::unordered_map<std::string, std::size_t> index_;
  std::int64_t adam_steps_ = 0;
};

// Versioned JSON checkpoint: parameter names, shapes, row-major values,
// optimizer moments, and a config fingerprint. Doubles survive the round
// trip bit-exactly.
void save_checkpoint(const ParamStore& store, const std::string& fingerprint,
                     const std::string& path);

// Rebuilds the store from the file. Throws if the stored fingerprint differs
// from `expected_fingerprint` (pass empty or set force to skip the check).
ParamStore load_checkpoint(const std::string& path,
                           const std::string& expected_fingerprint,
                           bool force = false);

std::string checkpoint_fingerprint(const std::string& path);

}  // namespace fjsrl
