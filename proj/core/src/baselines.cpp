#include "fjsrl/baselines.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace fjsrl {

DispatchRule parse_rule(const std::string& name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(c)));
  if (lower == "spt") return DispatchRule::SPT;
  if (lower == "fifo-spt") return DispatchRule::FifoSPT;
  if (lower == "mwkr-spt") return DispatchRule::MwkrSPT;
  if (lower == "random") return DispatchRule::Random;
  throw std::invalid_argument("unknown dispatch rule: " + name);
}

std::string rule_name(DispatchRule rule) {
  switch (rule) {
    case DispatchRule::SPT: return "spt";
    case DispatchRule::FifoSPT: return "fifo-spt";
    case DispatchRule::MwkrSPT: return "mwkr-spt";
    case DispatchRule::Random: return "random";
  }
  return "?";
}

namespace {

long long remaining_work(const Instance& inst, const EnvState& state, int job) {
  long long sum = 0;
  for (int k = state.next_op(job); k < static_cast<int>(inst.job(job).size()); ++k) {
    sum += inst.op(job, k).min_duration();
  }
  return sum;
}

std::size_t pick_by_rule(const Instance& inst, const EnvState& state,
                         const std::vector<CandidatePair>& cands,
                         DispatchRule rule, RngStream& rng) {
  switch (rule) {
    case DispatchRule::Random:
      return static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(cands.size()) - 1));
    case DispatchRule::SPT: {
      std::size_t best = 0;
      int best_dur = std::numeric_limits<int>::max();
      for (std::size_t i = 0; i < cands.size(); ++i) {
        const int d = inst.op(cands[i].job_id, cands[i].op_index)
                          .duration_on(cands[i].machine_id);
        if (d < best_dur) {
          best_dur = d;
          best = i;
        }
      }
      return best;
    }
    case DispatchRule::FifoSPT: {
      // Earliest-ready front op, then its cheapest machine.
      std::size_t best = 0;
      long long best_ready = std::numeric_limits<long long>::max();
      int best_dur = std::numeric_limits<int>::max();
      for (std::size_t i = 0; i < cands.size(); ++i) {
        const long long ready = state.job_ready(cands[i].job_id);
        const int d = inst.op(cands[i].job_id, cands[i].op_index)
                          .duration_on(cands[i].machine_id);
        if (ready < best_ready || (ready == best_ready && d < best_dur)) {
          best_ready = ready;
          best_dur = d;
          best = i;
        }
      }
      return best;
    }
    case DispatchRule::MwkrSPT: {
      // Most remaining work first, then cheapest machine.
      std::size_t best = 0;
      long long best_work = -1;
      int best_dur = std::numeric_limits<int>::max();
      for (std::size_t i = 0; i < cands.size(); ++i) {
        const long long work = remaining_work(inst, state, cands[i].job_id);
        const int d = inst.op(cands[i].job_id, cands[i].op_index)
                          .duration_on(cands[i].machine_id);
        if (work > best_work || (work == best_work && d < best_dur)) {
          best_work = work;
          best_dur = d;
          best = i;
        }
      }
      return best;
    }
  }
  return 0;
}

}  // namespace

Schedule dispatch_solve(const Instance& instance, DispatchRule rule,
                        std::uint64_t seed) {
  EnvState state(instance);
  RngStream rng(seed, 0xd15f);
  while (!state.done()) {
    const std::vector<CandidatePair> cands = state.candidates();
    state.step(cands[pick_by_rule(instance, state, cands, rule, rng)]);
  }
  return state.schedule();
}

Schedule random_solve(const Instance& instance, std::uint64_t seed) {
  return dispatch_solve(instance, DispatchRule::Random, seed);
}

namespace {

struct BnbContext {
  const Instance* inst;
  long long best_makespan;
  Schedule best_schedule;
  long long node_limit;
  long long nodes = 0;
  bool truncated = false;
};

long long lower_bound(const Instance& inst, const EnvState& state) {
  long long lb = 0;
  for (int j = 0; j < inst.n_machines(); ++j) {
    lb = std::max(lb, state.machine_free(j));
  }
  for (int i = 0; i < inst.n_jobs(); ++i) {
    long long rem = 0;
    for (int k = state.next_op(i); k < static_cast<int>(inst.job(i).size()); ++k) {
      rem += inst.op(i, k).min_duration();
    }
    lb = std::max(lb, state.job_ready(i) + rem);
  }
  return lb;
}

void bnb(BnbContext& ctx, EnvState& state) {
  if (state.done()) {
    const Schedule s = state.schedule();
    const long long ms = makespan(s);
    if (ms < ctx.best_makespan) {
      ctx.best_makespan = ms;
      ctx.best_schedule = s;
    }
    return;
  }
  if (ctx.nodes >= ctx.node_limit) {
    ctx.truncated = true;
    return;
  }
  ++ctx.nodes;
  if (lower_bound(*ctx.inst, state) >= ctx.best_makespan) return;

  // Cheapest durations first tightens the incumbent early.
  std::vector<CandidatePair> cands = state.candidates();
  std::stable_sort(cands.begin(), cands.end(),
                   [&](const CandidatePair& a, const CandidatePair& b) {
                     return ctx.inst->op(a.job_id, a.op_index).duration_on(a.machine_id) <
                            ctx.inst->op(b.job_id, b.op_index).duration_on(b.machine_id);
                   });
  for (const CandidatePair& pair : cands) {
    EnvState child = state;
    child.step(pair);
    bnb(ctx, child);
    if (ctx.truncated && ctx.nodes >= ctx.node_limit) return;
  }
}

}  // namespace

ExactResult exact_solve(const Instance& instance, long long node_limit) {
  BnbContext ctx;
  ctx.inst = &instance;
  ctx.node_limit = node_limit;
  // Seed the incumbent with a dispatch heuristic so pruning bites at once.
  ctx.best_schedule = dispatch_solve(instance, DispatchRule::SPT);
  ctx.best_makespan = makespan(ctx.best_schedule);

  EnvState root(instance);
  bnb(ctx, root);

  ExactResult res;
  res.schedule = std::move(ctx.best_schedule);
  res.makespan = ctx.best_makespan;
  res.optimal = !ctx.truncated;
  res.nodes_expanded = ctx.nodes;
  return res;
}

}  // namespace fjsrl
