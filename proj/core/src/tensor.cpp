#include "fjsrl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fjsrl {

namespace {

int numel_of(const std::vector<int>& shape) {
  int n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("negative dimension");
    n *= d;
  }
  return n;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape) {
  const int n = numel_of(shape);
  return from(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values) {
  const int n = numel_of(shape);
  require(n == static_cast<int>(values.size()), "tensor values/shape mismatch");
  Tensor t;
  t.data_ = std::make_shared<Data>();
  t.data_->shape = std::move(shape);
  t.data_->store = std::move(values);
  t.data_->numel = n;
  return t;
}

double Tensor::scalar() const {
  require(numel() == 1, "scalar() on non-scalar tensor");
  return ptr()[0];
}

std::vector<double> Tensor::to_vector() const {
  return std::vector<double>(ptr(), ptr() + numel());
}

// ---------------------------------------------------------------------------

Tensor Tape::make(std::vector<int> shape, std::vector<double> values,
                  std::function<void(Tape&)> back, bool needs_grad) {
  Tensor t = Tensor::from(std::move(shape), std::move(values));
  if (recording_ && needs_grad) {
    nodes_.push_back(Node{std::move(back), {}, t.numel()});
    t.node = static_cast<int>(nodes_.size()) - 1;
  }
  return t;
}

std::vector<double>& Tape::grad_buf(int node) {
  Node& n = nodes_.at(node);
  if (n.grad.empty()) n.grad.assign(n.numel, 0.0);
  return n.grad;
}

void Tape::reset() { nodes_.clear(); }

void Tape::backward(const Tensor& loss, double seed) {
  require(loss.numel() == 1, "backward needs a scalar loss");
  if (!recording_ || loss.node < 0) {
    throw std::invalid_argument("backward on a tensor that is not on the tape");
  }
  grad_buf(loss.node)[0] += seed;
  for (int i = loss.node; i >= 0; --i) {
    if (!nodes_[i].grad.empty() && nodes_[i].back) nodes_[i].back(*this);
  }
  reset();
}

Tensor Tape::input(std::vector<int> shape, std::vector<double> values) {
  return Tensor::from(std::move(shape), std::move(values));
}

Tensor Tape::leaf(std::vector<int> shape, const double* values,
                  std::vector<double>* grad_sink) {
  const int n = numel_of(shape);
  Tensor t;
  t.data_ = std::make_shared<Tensor::Data>();
  t.data_->shape = std::move(shape);
  t.data_->view = values;
  t.data_->numel = n;
  if (recording_) {
    nodes_.push_back(Node{{}, {}, n});
    const int id = static_cast<int>(nodes_.size()) - 1;
    t.node = id;
    nodes_[id].back = [id, grad_sink, n](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      for (int i = 0; i < n; ++i) (*grad_sink)[i] += g[i];
    };
  }
  return t;
}

// ---------------------------------------------------------------------------

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  require(a.shape().size() == 2 && b.shape().size() == 2, "matmul needs 2-D");
  const int r = a.rows(), k = a.cols(), c = b.cols();
  require(b.rows() == k, "matmul inner dimensions differ");
  std::vector<double> out(static_cast<std::size_t>(r) * c, 0.0);
  const double* pa = a.ptr();
  const double* pb = b.ptr();
  for (int i = 0; i < r; ++i) {
    for (int t = 0; t < k; ++t) {
      const double aik = pa[i * k + t];
      if (aik == 0.0) continue;
      const double* brow = pb + static_cast<std::size_t>(t) * c;
      double* orow = out.data() + static_cast<std::size_t>(i) * c;
      for (int j = 0; j < c; ++j) orow[j] += aik * brow[j];
    }
  }
  const bool track = tracked(a) || tracked(b);
  Tensor res = make({r, c}, std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, a, b, r, k, c](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      if (tape.tracked(a)) {
        std::vector<double>& da = tape.grad_buf(a.node);
        const double* pb = b.ptr();
        for (int i = 0; i < r; ++i)
          for (int t = 0; t < k; ++t) {
            double acc = 0.0;
            const double* grow = g.data() + static_cast<std::size_t>(i) * c;
            const double* brow = pb + static_cast<std::size_t>(t) * c;
            for (int j = 0; j < c; ++j) acc += grow[j] * brow[j];
            da[i * k + t] += acc;
          }
      }
      if (tape.tracked(b)) {
        std::vector<double>& db = tape.grad_buf(b.node);
        const double* pa = a.ptr();
        for (int i = 0; i < r; ++i) {
          const double* grow = g.data() + static_cast<std::size_t>(i) * c;
          for (int t = 0; t < k; ++t) {
            const double ait = pa[i * k + t];
            if (ait == 0.0) continue;
            double* drow = db.data() + static_cast<std::size_t>(t) * c;
            for (int j = 0; j < c; ++j) drow[j] += ait * grow[j];
          }
        }
      }
    };
  }
  return res;
}

namespace {
void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch");
}
}  // namespace

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const int n = a.numel();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a.ptr()[i] + b.ptr()[i];
  const bool track = tracked(a) || tracked(b);
  Tensor res = make(a.shape(), std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, a, b, n](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      if (tape.tracked(a)) {
        std::vector<double>& da = tape.grad_buf(a.node);
        for (int i = 0; i < n; ++i) da[i] += g[i];
      }
      if (tape.tracked(b)) {
        std::vector<double>& db = tape.grad_buf(b.node);
        for (int i = 0; i < n; ++i) db[i] += g[i];
      }
    };
  }
  return res;
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  const int n = a.numel();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a.ptr()[i] - b.ptr()[i];
  const bool track = tracked(a) || tracked(b);
  Tensor res = make(a.shape(), std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, a, b, n](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      if (tape.tracked(a)) {
        std::vector<double>& da = tape.grad_buf(a.node);
        for (int i = 0; i < n; ++i) da[i] += g[i];
      }
      if (tape.tracked(b)) {
        std::vector<double>& db = tape.grad_buf(b.node);
        for (int i = 0; i < n; ++i) db[i] -= g[i];
      }
    };
  }
  return res;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  const int n = a.numel();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a.ptr()[i] * b.ptr()[i];
  const bool track = tracked(a) || tracked(b);
  Tensor res = make(a.shape(), std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, a, b, n](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      if (tape.tracked(a)) {
        std::vector<double>& da = tape.grad_buf(a.node);
        for (int i = 0; i < n; ++i) da[i] += g[i] * b.ptr()[i];
      }
      if (tape.tracked(b)) {
        std::vector<double>& db = tape.grad_buf(b.node);
        for (int i = 0; i < n; ++i) db[i] += g[i] * a.ptr()[i];
      }
    };
  }
  return res;
}

Tensor Tape::minimum(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "minimum");
  const int n = a.numel();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = std::min(a.ptr()[i], b.ptr()[i]);
  const bool track = tracked(a) || tracked(b);
  Tensor res = make(a.shape(), std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, a, b, n](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      for (int i = 0; i < n; ++i) {
        const bool left = a.ptr()[i] <= b.ptr()[i];
        if (left && tape.tracked(a)) tape.grad_buf(a.node)[i] += g[i];
        if (!left && tape.tracked(b)) tape.grad_buf(b.node)[i] += g[i];
      }
    };
  }
  return res;
}

Tensor Tape::add_rowwise(const Tensor& mat, const Tensor& row) {
  require(mat.shape().size() == 2, "add_rowwise needs a matrix");
  require(row.numel() == mat.cols(), "add_rowwise: row width mismatch");
  const int r = mat.rows(), c = mat.cols();
  std::vector<double> out(static_cast<std::size_t>(r) * c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      out[i * c + j] = mat.ptr()[i * c + j] + row.ptr()[j];
  const bool track = tracked(mat) || tracked(row);
  Tensor res = make({r, c}, std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, mat, row, r, c](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      if (tape.tracked(mat)) {
        std::vector<double>& dm = tape.grad_buf(mat.node);
        for (int i = 0; i < r * c; ++i) dm[i] += g[i];
      }
      if (tape.tracked(row)) {
        std::vector<double>& dr = tape.grad_buf(row.node);
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < c; ++j) dr[j] += g[i * c + j];
      }
    };
  }
  return res;
}

Tensor Tape::scale(const Tensor& a, double c) {
  const int n = a.numel();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a.ptr()[i] * c;
  const bool track = tracked(a);
  Tensor res = make(a.shape(), std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, a, c, n](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      std::vector<double>& da = tape.grad_buf(a.node);
      for (int i = 0; i < n; ++i) da[i] += g[i] * c;
    };
  }
  return res;
}

Tensor Tape::add_scalar(const Tensor& a, double c) {
  const int n = a.numel();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a.ptr()[i] + c;
  const bool track = tracked(a);
  Tensor res = make(a.shape(), std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, a, n](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      std::vector<double>& da = tape.grad_buf(a.node);
      for (int i = 0; i < n; ++i) da[i] += g[i];
    };
  }
  return res;
}

Tensor Tape::clamp(const Tensor& a, double lo, double hi) {
  require(lo <= hi, "clamp: lo > hi");
  const int n = a.numel();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = std::min(std::max(a.ptr()[i], lo), hi);
  const bool track = tracked(a);
  Tensor res = make(a.shape(), std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, a, lo, hi, n](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      std::vector<double>& da = tape.grad_buf(a.node);
      for (int i = 0; i < n; ++i) {
        const double x = a.ptr()[i];
        if (x > lo && x < hi) da[i] += g[i];
      }
    };
  }
  return res;
}

Tensor Tape::exp(const Tensor& a) {
  const int n = a.numel();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = std::exp(a.ptr()[i]);
  const bool track = tracked(a);
  Tensor res = make(a.shape(), std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    const Tensor y = res;
    nodes_[id].back = [id, a, y, n](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      std::vector<double>& da = tape.grad_buf(a.node);
      for (int i = 0; i < n; ++i) da[i] += g[i] * y.ptr()[i];
    };
  }
  return res;
}

Tensor Tape::log(const Tensor& a) {
  const int n = a.numel();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = std::log(a.ptr()[i]);
  const bool track = tracked(a);
  Tensor res = make(a.shape(), std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, a, n](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      std::vector<double>& da = tape.grad_buf(a.node);
      for (int i = 0; i < n; ++i) da[i] += g[i] / a.ptr()[i];
    };
  }
  return res;
}

Tensor Tape::tanh(const Tensor& a) {
  const int n = a.numel();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = std::tanh(a.ptr()[i]);
  const bool track = tracked(a);
  Tensor res = make(a.shape(), std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    const Tensor y = res;
    nodes_[id].back = [id, a, y, n](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      std::vector<double>& da = tape.grad_buf(a.node);
      for (int i = 0; i < n; ++i) {
        const double t = y.ptr()[i];
        da[i] += g[i] * (1.0 - t * t);
      }
    };
  }
  return res;
}

Tensor Tape::elu(const Tensor& a) {
  const int n = a.numel();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const double x = a.ptr()[i];
    out[i] = x > 0.0 ? x : std::expm1(x);
  }
  const bool track = tracked(a);
  Tensor res = make(a.shape(), std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    const Tensor y = res;
    nodes_[id].back = [id, a, y, n](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      std::vector<double>& da = tape.grad_buf(a.node);
      for (int i = 0; i < n; ++i) {
        const double x = a.ptr()[i];
        da[i] += g[i] * (x > 0.0 ? 1.0 : y.ptr()[i] + 1.0);
      }
    };
  }
  return res;
}

Tensor Tape::leaky_relu(const Tensor& a, double slope) {
  const int n = a.numel();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const double x = a.ptr()[i];
    out[i] = x > 0.0 ? x : slope * x;
  }
  const bool track = tracked(a);
  Tensor res = make(a.shape(), std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, a, slope, n](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      std::vector<double>& da = tape.grad_buf(a.node);
      for (int i = 0; i < n; ++i) {
        da[i] += g[i] * (a.ptr()[i] > 0.0 ? 1.0 : slope);
      }
    };
  }
  return res;
}

// ---------------------------------------------------------------------------

Tensor Tape::concat_cols(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_cols of nothing");
  const int r = parts[0].rows();
  int total_cols = 0;
  bool track = false;
  for (const Tensor& p : parts) {
    require(p.shape().size() == 2 && p.rows() == r, "concat_cols: row mismatch");
    total_cols += p.cols();
    track = track || tracked(p);
  }
  std::vector<double> out(static_cast<std::size_t>(r) * total_cols);
  int col0 = 0;
  for (const Tensor& p : parts) {
    const int c = p.cols();
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j)
        out[static_cast<std::size_t>(i) * total_cols + col0 + j] =
            p.ptr()[i * c + j];
    col0 += c;
  }
  Tensor res = make({r, total_cols}, std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    const std::vector<Tensor> kept = parts;
    nodes_[id].back = [id, kept, r, total_cols](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      int col0 = 0;
      for (const Tensor& p : kept) {
        const int c = p.cols();
        if (tape.tracked(p)) {
          std::vector<double>& dp = tape.grad_buf(p.node);
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
              dp[i * c + j] +=
                  g[static_cast<std::size_t>(i) * total_cols + col0 + j];
        }
        col0 += c;
      }
    };
  }
  return res;
}

Tensor Tape::gather_rows(const Tensor& t, std::vector<int> rows) {
  require(t.shape().size() == 2, "gather_rows needs a matrix");
  const int c = t.cols();
  const int k = static_cast<int>(rows.size());
  for (int r : rows) require(r >= 0 && r < t.rows(), "gather_rows: row out of range");
  std::vector<double> out(static_cast<std::size_t>(k) * c);
  for (int i = 0; i < k; ++i)
    std::copy_n(t.ptr() + static_cast<std::size_t>(rows[i]) * c, c,
                out.begin() + static_cast<std::size_t>(i) * c);
  const bool track = tracked(t);
  Tensor res = make({k, c}, std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    const auto idx = std::make_shared<std::vector<int>>(std::move(rows));
    nodes_[id].back = [id, t, idx, k, c](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      std::vector<double>& dt = tape.grad_buf(t.node);
      for (int i = 0; i < k; ++i) {
        double* drow = dt.data() + static_cast<std::size_t>((*idx)[i]) * c;
        const double* grow = g.data() + static_cast<std::size_t>(i) * c;
        for (int j = 0; j < c; ++j) drow[j] += grow[j];
      }
    };
  }
  return res;
}

Tensor Tape::repeat_row(const Tensor& row, int n) {
  require(row.rows() == 1 && row.shape().size() == 2, "repeat_row needs 1 x d");
  require(n >= 1, "repeat_row: n must be >= 1");
  const int c = row.cols();
  std::vector<double> out(static_cast<std::size_t>(n) * c);
  for (int i = 0; i < n; ++i)
    std::copy_n(row.ptr(), c, out.begin() + static_cast<std::size_t>(i) * c);
  const bool track = tracked(row);
  Tensor res = make({n, c}, std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, row, n, c](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      std::vector<double>& dr = tape.grad_buf(row.node);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) dr[j] += g[static_cast<std::size_t>(i) * c + j];
    };
  }
  return res;
}

Tensor Tape::slice_rows(const Tensor& t, int begin, int count) {
  require(t.shape().size() == 2, "slice_rows needs a matrix");
  require(begin >= 0 && count >= 0 && begin + count <= t.rows(),
          "slice_rows: range out of bounds");
  const int c = t.cols();
  std::vector<double> out(static_cast<std::size_t>(count) * c);
  std::copy_n(t.ptr() + static_cast<std::size_t>(begin) * c,
              static_cast<std::size_t>(count) * c, out.begin());
  const bool track = tracked(t);
  Tensor res = make({count, c}, std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, t, begin, count, c](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      std::vector<double>& dt = tape.grad_buf(t.node);
      for (std::size_t i = 0; i < static_cast<std::size_t>(count) * c; ++i)
        dt[static_cast<std::size_t>(begin) * c + i] += g[i];
    };
  }
  return res;
}

// ---------------------------------------------------------------------------

Tensor Tape::mean_rows(const Tensor& t) {
  require(t.shape().size() == 2 && t.rows() >= 1, "mean_rows needs >= 1 row");
  const int r = t.rows(), c = t.cols();
  std::vector<double> out(c, 0.0);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out[j] += t.ptr()[i * c + j];
  for (int j = 0; j < c; ++j) out[j] /= r;
  const bool track = tracked(t);
  Tensor res = make({1, c}, std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, t, r, c](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      std::vector<double>& dt = tape.grad_buf(t.node);
      const double inv = 1.0 / r;
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) dt[i * c + j] += g[j] * inv;
    };
  }
  return res;
}

Tensor Tape::sum_all(const Tensor& t) {
  const int n = t.numel();
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += t.ptr()[i];
  const bool track = tracked(t);
  Tensor res = make({1, 1}, {s}, {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, t, n](Tape& tape) {
      const double g = tape.nodes_[id].grad[0];
      std::vector<double>& dt = tape.grad_buf(t.node);
      for (int i = 0; i < n; ++i) dt[i] += g;
    };
  }
  return res;
}

Tensor Tape::mean_all(const Tensor& t) {
  require(t.numel() >= 1, "mean_all of empty tensor");
  const int n = t.numel();
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += t.ptr()[i];
  s /= n;
  const bool track = tracked(t);
  Tensor res = make({1, 1}, {s}, {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, t, n](Tape& tape) {
      const double g = tape.nodes_[id].grad[0] / n;
      std::vector<double>& dt = tape.grad_buf(t.node);
      for (int i = 0; i < n; ++i) dt[i] += g;
    };
  }
  return res;
}

Tensor Tape::pick(const Tensor& t, int flat_index) {
  require(flat_index >= 0 && flat_index < t.numel(), "pick: index out of range");
  const bool track = tracked(t);
  Tensor res = make({1, 1}, {t.ptr()[flat_index]}, {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, t, flat_index](Tape& tape) {
      tape.grad_buf(t.node)[flat_index] += tape.nodes_[id].grad[0];
    };
  }
  return res;
}

// ---------------------------------------------------------------------------

Tensor Tape::conv1d(const Tensor& x, const Tensor& kernel, const Tensor& bias) {
  require(x.shape().size() == 2, "conv1d: x must be L x C_in");
  require(kernel.shape().size() == 3 && kernel.shape()[2] == 3,
          "conv1d: kernel must be C_out x C_in x 3");
  const int len = x.rows(), c_in = x.cols();
  const int c_out = kernel.shape()[0];
  require(kernel.shape()[1] == c_in, "conv1d: channel mismatch");
  require(bias.numel() == c_out, "conv1d: bias size mismatch");

  std::vector<double> out(static_cast<std::size_t>(len) * c_out);
  const double* px = x.ptr();
  const double* pk = kernel.ptr();
  for (int l = 0; l < len; ++l) {
    for (int o = 0; o < c_out; ++o) {
      double acc = bias.ptr()[o];
      for (int t = -1; t <= 1; ++t) {
        const int src = l + t;
        if (src < 0 || src >= len) continue;
        const double* xrow = px + static_cast<std::size_t>(src) * c_in;
        const double* krow = pk + (static_cast<std::size_t>(o) * c_in) * 3 + (t + 1);
        for (int ci = 0; ci < c_in; ++ci) acc += xrow[ci] * krow[ci * 3];
      }
      out[static_cast<std::size_t>(l) * c_out + o] = acc;
    }
  }
  const bool track = tracked(x) || tracked(kernel) || tracked(bias);
  Tensor res = make({len, c_out}, std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, x, kernel, bias, len, c_in, c_out](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      const double* px = x.ptr();
      const double* pk = kernel.ptr();
      std::vector<double>* dx = tape.tracked(x) ? &tape.grad_buf(x.node) : nullptr;
      std::vector<double>* dk =
          tape.tracked(kernel) ? &tape.grad_buf(kernel.node) : nullptr;
      std::vector<double>* db =
          tape.tracked(bias) ? &tape.grad_buf(bias.node) : nullptr;
      for (int l = 0; l < len; ++l) {
        for (int o = 0; o < c_out; ++o) {
          const double go = g[static_cast<std::size_t>(l) * c_out + o];
          if (go == 0.0) continue;
          if (db) (*db)[o] += go;
          for (int t = -1; t <= 1; ++t) {
            const int src = l + t;
            if (src < 0 || src >= len) continue;
            for (int ci = 0; ci < c_in; ++ci) {
              const std::size_t kidx =
                  (static_cast<std::size_t>(o) * c_in + ci) * 3 + (t + 1);
              if (dx) (*dx)[static_cast<std::size_t>(src) * c_in + ci] += go * pk[kidx];
              if (dk) (*dk)[kidx] += go * px[static_cast<std::size_t>(src) * c_in + ci];
            }
          }
        }
      }
    };
  }
  return res;
}

Tensor Tape::masked_softmax(const Tensor& logits,
                            const std::vector<unsigned char>& mask) {
  const int n = logits.numel();
  require(static_cast<int>(mask.size()) == n, "masked_softmax: mask size mismatch");
  double max_logit = -1e300;
  int live = 0;
  for (int i = 0; i < n; ++i) {
    if (mask[i]) {
      max_logit = std::max(max_logit, logits.ptr()[i]);
      ++live;
    }
  }
  require(live > 0, "masked_softmax: no feasible entry");
  std::vector<double> out(n, 0.0);
  double denom = 0.0;
  for (int i = 0; i < n; ++i) {
    if (mask[i]) {
      out[i] = std::exp(logits.ptr()[i] - max_logit);
      denom += out[i];
    }
  }
  for (int i = 0; i < n; ++i) out[i] /= denom;
  const bool track = tracked(logits);
  Tensor res = make(logits.shape(), std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    const Tensor probs = res;
    const auto m = std::make_shared<std::vector<unsigned char>>(mask);
    nodes_[id].back = [id, logits, probs, m, n](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      std::vector<double>& dl = tape.grad_buf(logits.node);
      double dot = 0.0;
      for (int i = 0; i < n; ++i)
        if ((*m)[i]) dot += g[i] * probs.ptr()[i];
      for (int i = 0; i < n; ++i)
        if ((*m)[i]) dl[i] += probs.ptr()[i] * (g[i] - dot);
    };
  }
  return res;
}

Tensor Tape::masked_entropy(const Tensor& probs,
                            const std::vector<unsigned char>& mask) {
  const int n = probs.numel();
  require(static_cast<int>(mask.size()) == n, "masked_entropy: mask size mismatch");
  double h = 0.0;
  for (int i = 0; i < n; ++i) {
    if (mask[i] && probs.ptr()[i] > 0.0) {
      h -= probs.ptr()[i] * std::log(probs.ptr()[i]);
    }
  }
  const bool track = tracked(probs);
  Tensor res = make({1, 1}, {h}, {}, track);
  if (track) {
    const int id = res.node;
    const auto m = std::make_shared<std::vector<unsigned char>>(mask);
    nodes_[id].back = [id, probs, m, n](Tape& tape) {
      const double g = tape.nodes_[id].grad[0];
      std::vector<double>& dp = tape.grad_buf(probs.node);
      for (int i = 0; i < n; ++i) {
        if ((*m)[i] && probs.ptr()[i] > 0.0) {
          dp[i] -= g * (std::log(probs.ptr()[i]) + 1.0);
        }
      }
    };
  }
  return res;
}

Tensor Tape::attention_pool(
    const Tensor& q_score, const Tensor& k_score, const Tensor& values,
    std::shared_ptr<const std::vector<std::vector<int>>> neighbors,
    double slope) {
  const int nq = q_score.numel();
  const int nk = k_score.numel();
  const int d = values.cols();
  require(values.rows() == nk, "attention_pool: key/value count mismatch");
  require(static_cast<int>(neighbors->size()) == nq,
          "attention_pool: neighbor list size mismatch");

  auto alphas = std::make_shared<std::vector<std::vector<double>>>(nq);
  std::vector<double> out(static_cast<std::size_t>(nq) * d, 0.0);
  for (int i = 0; i < nq; ++i) {
    const std::vector<int>& nbr = (*neighbors)[i];
    require(!nbr.empty(), "attention_pool: empty neighborhood");
    std::vector<double>& alpha = (*alphas)[i];
    alpha.resize(nbr.size());
    double max_e = -1e300;
    for (std::size_t jn = 0; jn < nbr.size(); ++jn) {
      const double u = q_score.ptr()[i] + k_score.ptr()[nbr[jn]];
      alpha[jn] = u > 0.0 ? u : slope * u;
      max_e = std::max(max_e, alpha[jn]);
    }
    double denom = 0.0;
    for (double& a : alpha) {
      a = std::exp(a - max_e);
      denom += a;
    }
    double* orow = out.data() + static_cast<std::size_t>(i) * d;
    for (std::size_t jn = 0; jn < nbr.size(); ++jn) {
      alpha[jn] /= denom;
      const double* vrow = values.ptr() + static_cast<std::size_t>(nbr[jn]) * d;
      for (int c = 0; c < d; ++c) orow[c] += alpha[jn] * vrow[c];
    }
  }
  const bool track = tracked(q_score) || tracked(k_score) || tracked(values);
  Tensor res = make({nq, d}, std::move(out), {}, track);
  if (track) {
    const int id = res.node;
    nodes_[id].back = [id, q_score, k_score, values, neighbors, alphas, slope,
                       nq, d](Tape& tape) {
      const std::vector<double>& g = tape.nodes_[id].grad;
      std::vector<double>* dq =
          tape.tracked(q_score) ? &tape.grad_buf(q_score.node) : nullptr;
      std::vector<double>* dk =
          tape.tracked(k_score) ? &tape.grad_buf(k_score.node) : nullptr;
      std::vector<double>* dv =
          tape.tracked(values) ? &tape.grad_buf(values.node) : nullptr;
      for (int i = 0; i < nq; ++i) {
        const std::vector<int>& nbr = (*neighbors)[i];
        const std::vector<double>& alpha = (*alphas)[i];
        const double* grow = g.data() + static_cast<std::size_t>(i) * d;
        // d(out_i)/d(alpha_j) = <grad_i, V_j>, then softmax and leaky_relu.
        std::vector<double> dalpha(nbr.size());
        double dot = 0.0;
        for (std::size_t jn = 0; jn < nbr.size(); ++jn) {
          const double* vrow =
              values.ptr() + static_cast<std::size_t>(nbr[jn]) * d;
          double acc = 0.0;
          for (int c = 0; c < d; ++c) acc += grow[c] * vrow[c];
          dalpha[jn] = acc;
          dot += acc * alpha[jn];
          if (dv) {
            double* dvrow = dv->data() + static_cast<std::size_t>(nbr[jn]) * d;
            for (int c = 0; c < d; ++c) dvrow[c] += alpha[jn] * grow[c];
          }
        }
        for (std::size_t jn = 0; jn < nbr.size(); ++jn) {
          const double de = alpha[jn] * (dalpha[jn] - dot);
          const double u = q_score.ptr()[i] + k_score.ptr()[nbr[jn]];
          const double du = de * (u > 0.0 ? 1.0 : slope);
          if (dq) (*dq)[i] += du;
          if (dk) (*dk)[nbr[jn]] += du;
        }
      }
    };
  }
  return res;
}

}  // namespace fjsrl
