#pragma once

#include <vector>

#include "fjsrl/instance.hpp"
#include "fjsrl/schedule.hpp"

namespace fjsrl {

// Action unit: a job's front unscheduled operation paired with one of its
// compatible machines.
struct CandidatePair {
  int job_id = 0;
  int op_index = 0;
  int machine_id = 0;

  bool operator==(const CandidatePair&) const = default;
};

// Raw per-step network inputs. X_op covers every operation (job-major rows),
// X_ma every machine. pair_mask has one row per eligible front operation
// (job order) and one column per machine; true marks a feasible pair.
struct FeatureBundle {
  static constexpr int kOpFeatures = 10;
  static constexpr int kMachineFeatures = 8;

  std::vector<double> x_op;        // total_ops x kOpFeatures, row-major
  std::vector<double> x_ma;        // n_machines x kMachineFeatures
  std::vector<unsigned char> pair_mask;  // n_front x n_machines
  int n_ops = 0;
  int n_machines = 0;

  // Context the network needs alongside the matrices: which op row each mask
  // row refers to, and the job each op row belongs to.
  std::vector<int> front_rows;  // mask row -> op row index
  std::vector<int> job_of_row;  // op row -> job id
};

struct StepResult {
  double reward = 0.0;
  bool done = false;
};

// How unscheduled operations are costed in the completion-time estimates.
enum class EstimateMode { MeanDuration, MinDuration };

// The FJSP simulator. Scheduling is append-only: an operation starts at
// max(machine free time, job ready time). One state per rollout; copying is
// cheap and used by the search baselines.
class EnvState {
 public:
  explicit EnvState(const Instance& instance,
                    EstimateMode mode = EstimateMode::MeanDuration);

  const Instance& instance() const { return *instance_; }
  int steps_done() const { return steps_done_; }
  bool done() const { return steps_done_ == instance_->total_ops(); }

  // Front op of every unfinished job crossed with its compatible machines,
  // job-major then machine-minor. Empty when terminal.
  std::vector<CandidatePair> candidates() const;

  // Applies a feasible pair; throws std::invalid_argument otherwise.
  // Reward is the drop in estimated makespan caused by the decision.
  StepResult step(const CandidatePair& pair);

  // Per-op completion estimates (job-major rows): actual end when scheduled,
  // clock-plus-mean-duration chains otherwise.
  std::vector<double> estimate_completion_times() const;
  double estimated_makespan() const;

  FeatureBundle extract_features() const;

  Schedule schedule() const;

  long long machine_free(int machine_id) const { return machine_free_[machine_id]; }
  long long job_ready(int job_id) const { return job_ready_[job_id]; }
  int next_op(int job_id) const { return next_op_[job_id]; }

 private:
  struct OpRecord {
    bool scheduled = false;
    int machine_id = -1;
    long long start = 0;
    long long end = 0;
  };

  bool is_candidate(const CandidatePair& pair) const;

  double estimated_duration(const OperationSpec& op) const;

  const Instance* instance_;
  EstimateMode estimate_mode_;
  std::vector<OpRecord> ops_;          // job-major rows
  std::vector<long long> machine_free_;
  std::vector<long long> job_ready_;
  std::vector<int> next_op_;           // per job, first unscheduled op index
  std::vector<long long> machine_busy_;  // total processing time assigned
  int steps_done_ = 0;
};

inline EnvState reset(const Instance& instance,
                      EstimateMode mode = EstimateMode::MeanDuration) {
  return EnvState(instance, mode);
}

}  // namespace fjsrl
