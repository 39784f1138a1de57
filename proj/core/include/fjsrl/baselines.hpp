#pragma once

#include <cstdint>
#include <string>

#include "fjsrl/env.hpp"
#include "fjsrl/instance.hpp"
#include "fjsrl/rng.hpp"
#include "fjsrl/schedule.hpp"

namespace fjsrl {

enum class DispatchRule { SPT, FifoSPT, MwkrSPT, Random };

DispatchRule parse_rule(const std::string& name);
std::string rule_name(DispatchRule rule);

// Runs the environment with a priority rule choosing each (op, machine)
// pair; ties break toward the lowest candidate index. The Random rule draws
// from the stream, everything else is deterministic.
Schedule dispatch_solve(const Instance& instance, DispatchRule rule,
                        std::uint64_t seed = 0);

Schedule random_solve(const Instance& instance, std::uint64_t seed);

struct ExactResult {
  Schedule schedule;
  long long makespan = 0;
  bool optimal = false;
  long long nodes_expanded = 0;
};

// Depth-first branch and bound over candidate pairs with a per-job
// remaining-work lower bound. Proves optimality when the search finishes
// within node_limit; otherwise returns the best incumbent found.
ExactResult exact_solve(const Instance& instance,
                        long long node_limit = 50'000'000);

}  // namespace fjsrl
