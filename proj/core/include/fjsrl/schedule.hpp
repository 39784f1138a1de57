#pragma once

#include <string>
#include <vector>

#include "fjsrl/instance.hpp"

namespace fjsrl {

struct Assignment {
  int job_id = 0;
  int op_index = 0;
  int machine_id = 0;
  long long start = 0;
  long long end = 0;
};

struct Schedule {
  std::vector<Assignment> assignments;
};

// Completion time of the last operation. Throws on an empty schedule.
long long makespan(const Schedule& schedule);

struct Violation {
  enum class Kind { MissingOp, DuplicateOp, UnknownOp, IncompatibleMachine,
                    WrongDuration, MachineOverlap, Precedence, NegativeStart };
  Kind kind;
  std::string detail;
};

// Feasibility check. Empty result iff every operation appears exactly once,
// machines/durations match the instance, same-machine intervals do not
// overlap, and job precedence holds. Violations are data, not errors.
std::vector<Violation> validate_schedule(const Instance& instance,
                                         const Schedule& schedule);

// 100 * (value - reference) / reference. Throws if reference <= 0.
double gap(double value, double reference);

// Render a percentage to two decimals, e.g. "10.79" or "-1.19".
std::string format_percent(double percent);

// max over jobs of the sum of per-op minimum durations; a valid lower bound
// on any schedule's makespan.
long long job_lower_bound(const Instance& instance);

}  // namespace fjsrl
