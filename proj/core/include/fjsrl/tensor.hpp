#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace fjsrl {

// Dense 64-bit float tensor. Values are either owned or a view into external
// storage (parameters); `node` links the tensor to the tape that produced it,
// -1 for constants and inference-mode results.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape);
  static Tensor from(std::vector<int> shape, std::vector<double> values);

  const std::vector<int>& shape() const { return data_->shape; }
  int numel() const { return data_->numel; }
  int rows() const { return data_->shape.at(0); }
  int cols() const { return data_->shape.size() > 1 ? data_->shape[1] : 1; }

  const double* ptr() const { return data_->ptr(); }
  double value_at(int i) const { return data_->ptr()[i]; }
  double scalar() const;
  std::vector<double> to_vector() const;

  bool defined() const { return data_ != nullptr; }

  int node = -1;

 private:
  friend class Tape;
  struct Data {
    std::vector<int> shape;
    std::vector<double> store;
    const double* view = nullptr;
    int numel = 0;
    const double* ptr() const { return view ? view : store.data(); }
    double* mutable_ptr() { return store.data(); }
  };
  std::shared_ptr<Data> data_;
};

// Reverse-mode gradient tape. All ops are methods so inference (recording
// off) and training share one code path. A tape is single-writer; backward()
// releases the recorded graph.
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}

  bool recording() const { return recording_; }

  // ---- tensor creation -----------------------------------------------
  // Constant input: never differentiated.
  Tensor input(std::vector<int> shape, std::vector<double> values);
  // Differentiable leaf viewing external storage; gradients accumulate into
  // *grad_sink (same length as the value buffer) on backward().
  Tensor leaf(std::vector<int> shape, const double* values,
              std::vector<double>* grad_sink);

  // ---- structural ------------------------------------------------------
  Tensor concat_cols(const std::vector<Tensor>& parts);
  Tensor gather_rows(const Tensor& t, std::vector<int> rows);
  Tensor repeat_row(const Tensor& row, int n);
  Tensor slice_rows(const Tensor& t, int begin, int count);

  // ---- linear algebra / elementwise ------------------------------------
  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor minimum(const Tensor& a, const Tensor& b);
  Tensor add_rowwise(const Tensor& mat, const Tensor& row);
  Tensor scale(const Tensor& a, double c);
  Tensor add_scalar(const Tensor& a, double c);
  Tensor clamp(const Tensor& a, double lo, double hi);
  Tensor exp(const Tensor& a);
  Tensor log(const Tensor& a);
  Tensor tanh(const Tensor& a);
  Tensor elu(const Tensor& a);
  Tensor leaky_relu(const Tensor& a, double slope);

  // ---- reductions -------------------------------------------------------
  Tensor mean_rows(const Tensor& t);  // k x d -> 1 x d
  Tensor sum_all(const Tensor& t);    // -> 1 x 1
  Tensor mean_all(const Tensor& t);   // -> 1 x 1
  Tensor pick(const Tensor& t, int flat_index);  // -> 1 x 1

  // ---- network-specific ops --------------------------------------------
  // Length-preserving 1D convolution: x is L x C_in, kernel C_out x C_in x 3
  // (kernel size 3, stride 1, zero padding 1), bias 1 x C_out.
  Tensor conv1d(const Tensor& x, const Tensor& kernel, const Tensor& bias);

  // Masked entries get probability exactly 0; the rest softmax over the
  // unmasked logits. Throws when nothing is unmasked.
  Tensor masked_softmax(const Tensor& logits,
                        const std::vector<unsigned char>& mask);

  // -sum over unmasked entries of p * ln p; probs from masked_softmax.
  Tensor masked_entropy(const Tensor& probs,
                        const std::vector<unsigned char>& mask);

  // One attention pool: for each query i, score its neighbor keys j by
  // leaky_relu(q_score[i] + k_score[j]), softmax over the neighborhood, and
  // mix values. q_score nq x 1, k_score nk x 1, values nk x d.
  Tensor attention_pool(const Tensor& q_score, const Tensor& k_score,
                        const Tensor& values,
                        std::shared_ptr<const std::vector<std::vector<int>>> neighbors,
                        double slope = 0.2);

  // ---- reverse pass -----------------------------------------------------
  // Seeds d(loss)/d(loss) = seed, runs the tape backwards, adds leaf
  // gradients into their sinks, then clears the tape.
  void backward(const Tensor& loss, double seed = 1.0);

  void reset();
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::function<void(Tape&)> back;
    std::vector<double> grad;
    int numel = 0;
  };

  Tensor make(std::vector<int> shape, std::vector<double> values,
              std::function<void(Tape&)> back, bool needs_grad);
  std::vector<double>& grad_buf(int node);
  bool tracked(const Tensor& t) const { return recording_ && t.node >= 0; }

  std::vector<Node> nodes_;
  bool recording_;
};

}  // namespace fjsrl
