#pragma once

#include <string>

#include "fjsrl/instance.hpp"
#include "fjsrl/schedule.hpp"

namespace fjsrl {

// SVG Gantt chart: one row per machine, one rectangle per assignment with a
// job-coded fill, x axis spanning [0, makespan]. Refuses infeasible
// schedules.
std::string emit_gantt(const Instance& instance, const Schedule& schedule);

}  // namespace fjsrl
