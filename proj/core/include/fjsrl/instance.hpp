#pragma once

#include <map>
#include <string>
#include <vector>

namespace fjsrl {

// One step of a job. `durations` maps 0-based machine index to the integer
// processing time on that machine; only listed machines are compatible.
struct OperationSpec {
  int job_id = 0;
  int op_index = 0;
  std::map<int, int> durations;

  int duration_on(int machine_id) const;
  int min_duration() const;
  double mean_duration() const;
};

// Immutable FJSP problem: jobs are ordered operation sequences, precedence is
// the sequence order. Construct via Instance::create, which enforces the
// structural invariants.
class Instance {
 public:
  static Instance create(int n_machines,
                         std::vector<std::vector<OperationSpec>> jobs);

  int n_jobs() const { return static_cast<int>(jobs_.size()); }
  int n_machines() const { return n_machines_; }
  const std::vector<std::vector<OperationSpec>>& jobs() const { return jobs_; }
  const std::vector<OperationSpec>& job(int i) const { return jobs_[i]; }
  const OperationSpec& op(int job_id, int op_index) const {
    return jobs_[job_id][op_index];
  }

  int total_ops() const { return total_ops_; }
  int max_duration() const { return max_duration_; }

  // Row index of (job, op) when operations are serialized job-major.
  int op_row(int job_id, int op_index) const {
    return job_row_offset_[job_id] + op_index;
  }
  int job_row_offset(int job_id) const { return job_row_offset_[job_id]; }

  bool operator==(const Instance& other) const;

 private:
  Instance() = default;

  int n_machines_ = 0;
  std::vector<std::vector<OperationSpec>> jobs_;
  int total_ops_ = 0;
  int max_duration_ = 0;
  std::vector<int> job_row_offset_;
};

}  // namespace fjsrl
