#include "fjsrl/schedule.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace fjsrl {

long long makespan(const Schedule& schedule) {
  if (schedule.assignments.empty()) {
    throw std::invalid_argument("makespan of an empty schedule is undefined");
  }
  long long best = 0;
  for (const Assignment& a : schedule.assignments) best = std::max(best, a.end);
  return best;
}

namespace {

std::string op_name(int job, int op) {
  return "job " + std::to_string(job) + " op " + std::to_string(op);
}

}  // namespace

std::vector<Violation> validate_schedule(const Instance& instance,
                                         const Schedule& schedule) {
  std::vector<Violation> out;
  const int total = instance.total_ops();
  std::vector<int> seen(total, 0);
  // (job, op) -> assignment, for precedence checks; only first occurrence.
  std::vector<const Assignment*> by_row(total, nullptr);

  for (const Assignment& a : schedule.assignments) {
    if (a.job_id < 0 || a.job_id >= instance.n_jobs() || a.op_index < 0 ||
        a.op_index >= static_cast<int>(instance.job(a.job_id).size())) {
      out.push_back({Violation::Kind::UnknownOp,
                     op_name(a.job_id, a.op_index) + " not in instance"});
      continue;
    }
    const int row = instance.op_row(a.job_id, a.op_index);
    if (++seen[row] > 1) {
      out.push_back({Violation::Kind::DuplicateOp,
                     op_name(a.job_id, a.op_index) + " assigned more than once"});
      continue;
    }
    by_row[row] = &a;
    const OperationSpec& spec = instance.op(a.job_id, a.op_index);
    auto it = spec.durations.find(a.machine_id);
    if (it == spec.durations.end()) {
      out.push_back({Violation::Kind::IncompatibleMachine,
                     op_name(a.job_id, a.op_index) + " on incompatible machine " +
                         std::to_string(a.machine_id)});
      continue;
    }
    if (a.start < 0) {
      out.push_back({Violation::Kind::NegativeStart,
                     op_name(a.job_id, a.op_index) + " starts before time 0"});
    }
    if (a.end != a.start + it->second) {
      out.push_back({Violation::Kind::WrongDuration,
                     op_name(a.job_id, a.op_index) + " has end != start + p"});
    }
  }

  for (int row = 0; row < total; ++row) {
    if (seen[row] == 0) {
      // Recover (job, op) from the row index.
      for (int i = 0; i < instance.n_jobs(); ++i) {
        const int off = instance.job_row_offset(i);
        const int n_i = static_cast<int>(instance.job(i).size());
        if (row >= off && row < off + n_i) {
          out.push_back({Violation::Kind::MissingOp,
                         op_name(i, row - off) + " is unscheduled"});
          break;
        }
      }
    }
  }

  // Same-machine overlap: sort each machine's intervals by start.
  std::map<int, std::vector<const Assignment*>> per_machine;
  for (const Assignment& a : schedule.assignments) per_machine[a.machine_id].push_back(&a);
  for (auto& [machine, list] : per_machine) {
    std::sort(list.begin(), list.end(),
              [](const Assignment* x, const Assignment* y) {
                return x->start < y->start;
              });
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i]->start < list[i - 1]->end) {
        out.push_back({Violation::Kind::MachineOverlap,
                       "machine " + std::to_string(machine) + ": " +
                           op_name(list[i - 1]->job_id, list[i - 1]->op_index) +
                           " overlaps " +
                           op_name(list[i]->job_id, list[i]->op_index)});
      }
    }
  }

  // Job precedence: op k+1 starts no earlier than op k ends.
  for (int i = 0; i < instance.n_jobs(); ++i) {
    const int off = instance.job_row_offset(i);
    const int n_i = static_cast<int>(instance.job(i).size());
    for (int k = 1; k < n_i; ++k) {
      const Assignment* prev = by_row[off + k - 1];
      const Assignment* cur = by_row[off + k];
      if (prev && cur && cur->start < prev->end) {
        out.push_back({Violation::Kind::Precedence,
                       op_name(i, k) + " starts before " + op_name(i, k - 1) +
                           " ends"});
      }
    }
  }
  return out;
}

double gap(double value, double reference) {
  if (reference <= 0.0) {
    throw std::invalid_argument("gap reference must be positive");
  }
  return 100.0 * (value - reference) / reference;
}

std::string format_percent(double percent) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", percent);
  return std::string(buf);
}

long long job_lower_bound(const Instance& instance) {
  long long best = 0;
  for (const auto& job : instance.jobs()) {
    long long sum = 0;
    for (const OperationSpec& op : job) sum += op.min_duration();
    best = std::max(best, sum);
  }
  return best;
}

}  // namespace fjsrl
