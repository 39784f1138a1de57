#include "fjsrl/env.hpp"

#include <algorithm>
#include <stdexcept>

namespace fjsrl {

EnvState::EnvState(const Instance& instance, EstimateMode mode)
    : instance_(&instance),
      estimate_mode_(mode),
      ops_(instance.total_ops()),
      machine_free_(instance.n_machines(), 0),
      job_ready_(instance.n_jobs(), 0),
      next_op_(instance.n_jobs(), 0),
      machine_busy_(instance.n_machines(), 0) {}

double EnvState::estimated_duration(const OperationSpec& op) const {
  return estimate_mode_ == EstimateMode::MeanDuration
             ? op.mean_duration()
             : static_cast<double>(op.min_duration());
}

std::vector<CandidatePair> EnvState::candidates() const {
  std::vector<CandidatePair> out;
  for (int i = 0; i < instance_->n_jobs(); ++i) {
    const int k = next_op_[i];
    if (k >= static_cast<int>(instance_->job(i).size())) continue;
    for (const auto& [machine, dur] : instance_->op(i, k).durations) {
      out.push_back({i, k, machine});
    }
  }
  return out;
}

bool EnvState::is_candidate(const CandidatePair& pair) const {
  if (pair.job_id < 0 || pair.job_id >= instance_->n_jobs()) return false;
  if (next_op_[pair.job_id] != pair.op_index) return false;
  const auto& durs = instance_->op(pair.job_id, pair.op_index).durations;
  return durs.count(pair.machine_id) > 0;
}

StepResult EnvState::step(const CandidatePair& pair) {
  if (!is_candidate(pair)) {
    throw std::invalid_argument("step on infeasible pair (job " +
                                std::to_string(pair.job_id) + ", op " +
                                std::to_string(pair.op_index) + ", machine " +
                                std::to_string(pair.machine_id) + ")");
  }
  const double est_before = estimated_makespan();

  const int dur = instance_->op(pair.job_id, pair.op_index).duration_on(pair.machine_id);
  const long long start =
      std::max(machine_free_[pair.machine_id], job_ready_[pair.job_id]);
  const long long end = start + dur;

  OpRecord& rec = ops_[instance_->op_row(pair.job_id, pair.op_index)];
  rec.scheduled = true;
  rec.machine_id = pair.machine_id;
  rec.start = start;
  rec.end = end;

  machine_free_[pair.machine_id] = end;
  machine_busy_[pair.machine_id] += dur;
  job_ready_[pair.job_id] = end;
  ++next_op_[pair.job_id];
  ++steps_done_;

  StepResult res;
  res.reward = est_before - estimated_makespan();
  res.done = done();
  return res;
}

std::vector<double> EnvState::estimate_completion_times() const {
  std::vector<double> est(instance_->total_ops(), 0.0);
  for (int i = 0; i < instance_->n_jobs(); ++i) {
    const auto& job = instance_->job(i);
    const int front = next_op_[i];
    double prev = 0.0;
    for (int k = 0; k < static_cast<int>(job.size()); ++k) {
      const int row = instance_->op_row(i, k);
      if (k < front) {
        est[row] = static_cast<double>(ops_[row].end);
        prev = est[row];
        continue;
      }
      const OperationSpec& op = job[k];
      if (k == front) {
        long long earliest_machine = machine_free_[op.durations.begin()->first];
        for (const auto& [machine, dur] : op.durations) {
          earliest_machine = std::min(earliest_machine, machine_free_[machine]);
        }
        const double start = static_cast<double>(
            std::max(job_ready_[i], earliest_machine));
        est[row] = start + estimated_duration(op);
      } else {
        est[row] = prev + estimated_duration(op);
      }
      prev = est[row];
    }
  }
  return est;
}

double EnvState::estimated_makespan() const {
  const std::vector<double> est = estimate_completion_times();
  double best = 0.0;
  for (double e : est) best = std::max(best, e);
  return best;
}

FeatureBundle EnvState::extract_features() const {
  FeatureBundle fb;
  const Instance& inst = *instance_;
  const int total = inst.total_ops();
  const int m = inst.n_machines();
  fb.n_ops = total;
  fb.n_machines = m;
  fb.job_of_row.resize(total);

  const std::vector<double> est = estimate_completion_times();
  double est_cmax = 0.0;
  for (double e : est) est_cmax = std::max(est_cmax, e);
  // Durations are positive integers, so the estimate is always >= 1.
  const double inv_cmax = 1.0 / est_cmax;
  const double max_dur = static_cast<double>(inst.max_duration());

  // Per-job remaining mean work (unscheduled ops only).
  std::vector<double> job_remaining(inst.n_jobs(), 0.0);
  for (int i = 0; i < inst.n_jobs(); ++i) {
    for (int k = next_op_[i]; k < static_cast<int>(inst.job(i).size()); ++k) {
      job_remaining[i] += inst.op(i, k).mean_duration();
    }
  }

  fb.x_op.assign(static_cast<std::size_t>(total) * FeatureBundle::kOpFeatures, 0.0);
  for (int i = 0; i < inst.n_jobs(); ++i) {
    const auto& job = inst.job(i);
    const int n_i = static_cast<int>(job.size());
    for (int k = 0; k < n_i; ++k) {
      const int row = inst.op_row(i, k);
      fb.job_of_row[row] = i;
      const OperationSpec& op = job[k];
      const OpRecord& rec = ops_[row];
      double* f = &fb.x_op[static_cast<std::size_t>(row) * FeatureBundle::kOpFeatures];

      double min_dur = op.durations.begin()->second;
      for (const auto& [mach, d] : op.durations) min_dur = std::min(min_dur, static_cast<double>(d));
      const double mean_dur = op.mean_duration();
      const double est_end = est[row];
      const double actual_dur = rec.scheduled
                                    ? static_cast<double>(rec.end - rec.start)
                                    : mean_dur;

      f[0] = rec.scheduled ? 1.0 : 0.0;
      f[1] = (!rec.scheduled && next_op_[i] == k) ? 1.0 : 0.0;
      f[2] = static_cast<double>(op.durations.size()) / static_cast<double>(m);
      f[3] = mean_dur / max_dur;
      f[4] = min_dur / max_dur;
      f[5] = static_cast<double>(k) / static_cast<double>(n_i);
      f[6] = static_cast<double>(n_i - k) / static_cast<double>(n_i);
      f[7] = est_end * inv_cmax;
      f[8] = (est_end - actual_dur) * inv_cmax;
      f[9] = job_remaining[i] * inv_cmax;
    }
  }

  // Eligible front ops, job-major.
  std::vector<int> front_rows;
  for (int i = 0; i < inst.n_jobs(); ++i) {
    if (next_op_[i] < static_cast<int>(inst.job(i).size())) {
      front_rows.push_back(inst.op_row(i, next_op_[i]));
    }
  }
  fb.front_rows = front_rows;
  const int n_front = static_cast<int>(front_rows.size());

  fb.pair_mask.assign(static_cast<std::size_t>(n_front) * m, 0);
  for (int r = 0; r < n_front; ++r) {
    const int row = front_rows[r];
    const int job = fb.job_of_row[row];
    const OperationSpec& op = inst.job(job)[row - inst.job_row_offset(job)];
    for (const auto& [mach, d] : op.durations) {
      fb.pair_mask[static_cast<std::size_t>(r) * m + mach] = 1;
    }
  }

  long long clock = 0;
  for (int j = 0; j < m; ++j) clock = std::max(clock, machine_free_[j]);

  fb.x_ma.assign(static_cast<std::size_t>(m) * FeatureBundle::kMachineFeatures, 0.0);
  for (int j = 0; j < m; ++j) {
    double* f = &fb.x_ma[static_cast<std::size_t>(j) * FeatureBundle::kMachineFeatures];
    int eligible = 0;
    double min_el = 0.0, sum_el = 0.0;
    for (int row : front_rows) {
      const int job = fb.job_of_row[row];
      const OperationSpec& op = inst.job(job)[row - inst.job_row_offset(job)];
      auto it = op.durations.find(j);
      if (it != op.durations.end()) {
        const double d = static_cast<double>(it->second);
        min_el = eligible == 0 ? d : std::min(min_el, d);
        sum_el += d;
        ++eligible;
      }
    }
    f[0] = static_cast<double>(machine_free_[j]) * inv_cmax;
    f[1] = static_cast<double>(machine_busy_[j]) /
           static_cast<double>(std::max<long long>(1, clock));
    f[2] = static_cast<double>(eligible) / static_cast<double>(std::max(1, n_front));
    f[3] = eligible > 0 ? min_el / max_dur : 1.0;
    f[4] = eligible > 0 ? sum_el / eligible / max_dur : 0.0;
    f[5] = static_cast<double>(machine_busy_[j]) * inv_cmax;
    f[6] = static_cast<double>(machine_free_[j] - machine_busy_[j]) * inv_cmax;
    f[7] = eligible > 0 ? 1.0 : 0.0;
  }
  return fb;
}

Schedule EnvState::schedule() const {
  Schedule s;
  for (int i = 0; i < instance_->n_jobs(); ++i) {
    for (int k = 0; k < static_cast<int>(instance_->job(i).size()); ++k) {
      const OpRecord& rec = ops_[instance_->op_row(i, k)];
      if (rec.scheduled) {
        s.assignments.push_back({i, k, rec.machine_id, rec.start, rec.end});
      }
    }
  }
  return s;
}

}  // namespace fjsrl
