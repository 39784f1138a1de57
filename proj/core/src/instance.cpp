#include "fjsrl/instance.hpp"

#include <stdexcept>

namespace fjsrl {

int OperationSpec::duration_on(int machine_id) const {
  auto it = durations.find(machine_id);
  if (it == durations.end()) {
    throw std::invalid_argument("machine " + std::to_string(machine_id) +
                                " is not compatible with job " +
                                std::to_string(job_id) + " op " +
                                std::to_string(op_index));
  }
  return it->second;
}

int OperationSpec::min_duration() const {
  int best = durations.begin()->second;
  for (const auto& [m, p] : durations) best = std::min(best, p);
  return best;
}

double OperationSpec::mean_duration() const {
  double sum = 0.0;
  for (const auto& [m, p] : durations) sum += p;
  return sum / static_cast<double>(durations.size());
}

Instance Instance::create(int n_machines,
                          std::vector<std::vector<OperationSpec>> jobs) {
  if (n_machines < 1) throw std::invalid_argument("n_machines must be >= 1");
  if (jobs.empty()) throw std::invalid_argument("instance needs >= 1 job");

  Instance inst;
  inst.n_machines_ = n_machines;
  inst.job_row_offset_.reserve(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (jobs[i].empty()) {
      throw std::invalid_argument("job " + std::to_string(i) +
                                  " has no operations");
    }
    inst.job_row_offset_.push_back(inst.total_ops_);
    for (std::size_t k = 0; k < jobs[i].size(); ++k) {
      OperationSpec& op = jobs[i][k];
      op.job_id = static_cast<int>(i);
      op.op_index = static_cast<int>(k);
      if (op.durations.empty()) {
        throw std::invalid_argument("job " + std::to_string(i) + " op " +
                                    std::to_string(k) +
                                    " has no compatible machines");
      }
      for (const auto& [m, p] : op.durations) {
        if (m < 0 || m >= n_machines) {
          throw std::invalid_argument("machine index " + std::to_string(m) +
                                      " out of range");
        }
        if (p <= 0) {
          throw std::invalid_argument("processing time must be positive");
        }
        inst.max_duration_ = std::max(inst.max_duration_, p);
      }
      ++inst.total_ops_;
    }
  }
  inst.jobs_ = std::move(jobs);
  return inst;
}

bool Instance::operator==(const Instance& other) const {
  if (n_machines_ != other.n_machines_ || jobs_.size() != other.jobs_.size())
    return false;
  for (std::size_t i = 0; i < jobs_.size(); ++i) {
    if (jobs_[i].size() != other.jobs_[i].size()) return false;
    for (std::size_t k = 0; k < jobs_[i].size(); ++k) {
      if (jobs_[i][k].durations != other.jobs_[i][k].durations) return false;
    }
  }
  return true;
}

}  // namespace fjsrl
