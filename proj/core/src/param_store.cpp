#include "fjsrl/param_store.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fjsrl {

Param& ParamStore::create(const std::string& name, std::vector<int> shape) {
  if (has(name)) throw std::invalid_argument("duplicate parameter: " + name);
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  params_.push_back(Param{name, std::move(shape), std::vector<double>(n, 0.0),
                          std::vector<double>(n, 0.0),
                          std::vector<double>(n, 0.0),
                          std::vector<double>(n, 0.0)});
  index_[name] = params_.size() - 1;
  return params_.back();
}

Param& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("unknown parameter: " + name);
  return params_[it->second];
}

const Param& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("unknown parameter: " + name);
  return params_[it->second];
}

std::size_t ParamStore::total_values() const {
  std::size_t n = 0;
  for (const Param& p : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (Param& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

double ParamStore::grad_norm() const {
  double sq = 0.0;
  for (const Param& p : params_)
    for (double g : p.grad) sq += g * g;
  return std::sqrt(sq);
}

void ParamStore::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (norm <= max_norm || norm == 0.0) return;
  const double scale = max_norm / norm;
  for (Param& p : params_)
    for (double& g : p.grad) g *= scale;
}

void ParamStore::adam_step(const AdamConfig& cfg) {
  ++adam_steps_;
  const double t = static_cast<double>(adam_steps_);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (Param& p : params_) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      p.m[i] = cfg.beta1 * p.m[i] + (1.0 - cfg.beta1) * g;
      p.v[i] = cfg.beta2 * p.v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = p.m[i] / bc1;
      const double v_hat = p.v[i] / bc2;
      p.value[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

Tensor ParamStore::use(Tape& tape, const std::string& name) {
  Param& p = at(name);
  return tape.leaf(p.shape, p.value.data(), &p.grad);
}

namespace {
constexpr int kCheckpointVersion = 1;
}

void save_checkpoint(const ParamStore& store, const std::string& fingerprint,
                     const std::string& path) {
  nlohmann::json params = nlohmann::json::array();
  for (const Param& p : store.params()) {
    params.push_back(nlohmann::json{{"name", p.name},
                                    {"shape", p.shape},
                                    {"data", p.value},
                                    {"m", p.m},
                                    {"v", p.v}});
  }
  nlohmann::json doc{{"format_version", kCheckpointVersion},
                     {"fingerprint", fingerprint},
                     {"adam_steps", store.adam_steps()},
                     {"params", std::move(params)}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << doc.dump(1, '\t') << '\n';
  if (!out.good()) throw std::runtime_error("short write on checkpoint: " + path);
}

namespace {

nlohmann::json read_checkpoint_doc(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& err) {
    throw std::runtime_error("corrupt checkpoint " + path + ": " + err.what());
  }
  if (!doc.contains("format_version") ||
      doc["format_version"].get<int>() != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version in " + path);
  }
  return doc;
}

}  // namespace

ParamStore load_checkpoint(const std::string& path,
                           const std::string& expected_fingerprint,
                           bool force) {
  const nlohmann::json doc = read_checkpoint_doc(path);
  const std::string fp = doc.at("fingerprint").get<std::string>();
  if (!force && !expected_fingerprint.empty() && fp != expected_fingerprint) {
    throw std::runtime_error(
        "checkpoint fingerprint mismatch (trained with a different "
        "network config); pass force to override");
  }
  ParamStore store;
  try {
    for (const nlohmann::json& jp : doc.at("params")) {
      Param& p = store.create(jp.at("name").get<std::string>(),
                              jp.at("shape").get<std::vector<int>>());
      const auto data = jp.at("data").get<std::vector<double>>();
      const auto m = jp.at("m").get<std::vector<double>>();
      const auto v = jp.at("v").get<std::vector<double>>();
      if (data.size() != p.value.size() || m.size() != p.m.size() ||
          v.size() != p.v.size()) {
        throw std::runtime_error("parameter " + p.name + " has wrong length");
      }
      p.value = data;
      p.m = m;
      p.v = v;
    }
    store.set_adam_steps(doc.at("adam_steps").get<std::int64_t>());
  } catch (const nlohmann::json::exception& err) {
    throw std::runtime_error("corrupt checkpoint " + path + ": " + err.what());
  }
  return store;
}

std::string checkpoint_fingerprint(const std::string& path) {
  return read_checkpoint_doc(path).at("fingerprint").get<std::string>();
}

}  // namespace fjsrl
