#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fjsrl/instance.hpp"
#include "fjsrl/policy.hpp"

namespace fjsrl {

struct ReportRow {
  std::string name;
  long long makespan = 0;
  double gap_percent = 0.0;
  bool has_gap = false;
  double seconds = 0.0;
};

struct RunReport {
  std::string checkpoint;
  std::string mode;      // "greedy" or "sampling"
  int n_samples = 1;     // samples per instance in sampling mode
  std::uint64_t seed = 0;
  std::vector<ReportRow> rows;
  double mean_makespan = 0.0;
  double std_makespan = 0.0;
  double mean_gap = 0.0;
  bool has_gap = false;

  std::string render_table() const;
  // Line-delimited records: one header line, then one line per row.
  std::string to_jsonl() const;
};

using NamedInstances = std::vector<std::pair<std::string, Instance>>;

// Loads every .json / .fjs instance in the directory, sorted by filename.
NamedInstances load_instance_dir(const std::string& dir);

// name -> reference makespan, from a JSON object document.
std::map<std::string, double> load_reference_map(const std::string& path);

// Greedy: one deterministic rollout per instance. Sampling: n_samples
// stochastic rollouts per instance, keep the per-instance minimum makespan.
// Parallelizes across instances (FJSRL_THREADS); results are independent of
// the thread count.
RunReport evaluate_dataset(PolicyNet& policy, const NamedInstances& instances,
                           SelectMode mode, int n_samples, std::uint64_t seed,
                           const std::map<std::string, double>& reference = {});

int env_thread_count();

}  // namespace fjsrl
