#include "fjsrl/report.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fjsrl/instance_io.hpp"
#include "fjsrl/ppo.hpp"
#include "fjsrl/schedule.hpp"
#include "json.hpp"

namespace fjsrl {

namespace {
constexpr std::uint64_t kEvalBase = 4ull << 40;
}

int env_thread_count() {
  if (const char* env = std::getenv("FJSRL_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

NamedInstances load_instance_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("not a directory: " + dir);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".json" || ext == ".fjs") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw std::runtime_error("no .json or .fjs instances in " + dir);
  }
  NamedInstances out;
  for (const fs::path& path : files) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string name = path.stem().string();
    if (path.extension() == ".json") {
      out.emplace_back(name, parse_instance(buf.str()));
    } else {
      out.emplace_back(name, parse_fjs_text(buf.str()));
    }
  }
  return out;
}

std::map<std::string, double> load_reference_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open reference file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& err) {
    throw std::runtime_error(std::string("bad reference file: ") + err.what());
  }
  std::map<std::string, double> out;
  for (const auto& [key, value] : doc.items()) {
    out[key] = value.get<double>();
  }
  return out;
}

RunReport evaluate_dataset(PolicyNet& policy, const NamedInstances& instances,
                           SelectMode mode, int n_samples, std::uint64_t seed,
                           const std::map<std::string, double>& reference) {
  if (instances.empty()) throw std::invalid_argument("empty dataset");
  if (mode == SelectMode::Sampling && n_samples < 1) {
    throw std::invalid_argument("sampling needs n_samples >= 1");
  }

  RunReport report;
  report.mode = mode == SelectMode::Greedy ? "greedy" : "sampling";
  report.n_samples = mode == SelectMode::Greedy ? 1 : n_samples;
  report.seed = seed;
  report.rows.resize(instances.size());

  const int threads =
      std::min<int>(env_thread_count(), static_cast<int>(instances.size()));

  auto solve_one = [&](PolicyNet& net, std::size_t idx) {
    const auto t0 = std::chrono::steady_clock::now();
    long long best = 0;
    const int runs = mode == SelectMode::Greedy ? 1 : n_samples;
    for (int s = 0; s < runs; ++s) {
      RngStream rng(seed, kEvalBase + (static_cast<std::uint64_t>(idx) << 24) + s);
      const Trajectory traj =
          run_episode(net, instances[idx].second, mode, rng);
      if (s == 0 || traj.final_makespan < best) best = traj.final_makespan;
    }
    ReportRow& row = report.rows[idx];
    row.name = instances[idx].first;
    row.makespan = best;
    row.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  };

  if (threads <= 1) {
    for (std::size_t i = 0; i < instances.size(); ++i) solve_one(policy, i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> cursor{0};
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t]() {
        PolicyNet local = policy;  // isolated parameter copy per worker
        for (;;) {
          const std::size_t i = cursor.fetch_add(1);
          if (i >= instances.size()) break;
          solve_one(local, i);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }

  double sum = 0.0;
  for (const ReportRow& row : report.rows) sum += static_cast<double>(row.makespan);
  report.mean_makespan = sum / static_cast<double>(report.rows.size());
  double var = 0.0;
  for (const ReportRow& row : report.rows) {
    const double d = static_cast<double>(row.makespan) - report.mean_makespan;
    var += d * d;
  }
  report.std_makespan =
      report.rows.size() > 1
          ? std::sqrt(var / static_cast<double>(report.rows.size() - 1))
          : 0.0;

  if (!reference.empty()) {
    double gap_sum = 0.0;
    int gap_count = 0;
    for (ReportRow& row : report.rows) {
      auto it = reference.find(row.name);
      if (it == reference.end()) continue;
      row.gap_percent = gap(static_cast<double>(row.makespan), it->second);
      row.has_gap = true;
      gap_sum += row.gap_percent;
      ++gap_count;
    }
    if (gap_count > 0) {
      report.mean_gap = gap_sum / gap_count;
      report.has_gap = true;
    }
  }
  return report;
}

std::string RunReport::render_table() const {
  std::ostringstream out;
  out << "# mode=" << mode << " samples=" << n_samples << " seed=" << seed;
  if (!checkpoint.empty()) out << " checkpoint=" << checkpoint;
  out << "\n";
  out << "instance                     makespan";
  if (has_gap) out << "     gap%";
  out << "   seconds\n";
  for (const ReportRow& row : rows) {
    char line[160];
    if (row.has_gap) {
      std::snprintf(line, sizeof(line), "%-28s %8lld %8s %9.3f\n",
                    row.name.c_str(), row.makespan,
                    format_percent(row.gap_percent).c_str(), row.seconds);
    } else {
      std::snprintf(line, sizeof(line), "%-28s %8lld %9.3f\n", row.name.c_str(),
                    row.makespan, row.seconds);
    }
    out << line;
  }
  char tail[160];
  std::snprintf(tail, sizeof(tail), "mean %.2f  std %.2f", mean_makespan,
                std_makespan);
  out << tail;
  if (has_gap) out << "  mean-gap " << format_percent(mean_gap) << "%";
  out << "\n";
  return out.str();
}

std::string RunReport::to_jsonl() const {
  std::ostringstream out;
  nlohmann::json header{{"record", "header"},
                        {"mode", mode},
                        {"n_samples", n_samples},
                        {"seed", seed},
                        {"instances", rows.size()},
                        {"mean_makespan", mean_makespan},
                        {"std_makespan", std_makespan}};
  if (!checkpoint.empty()) header["checkpoint"] = checkpoint;
  if (has_gap) header["mean_gap"] = mean_gap;
  out << header.dump() << '\n';
  for (const ReportRow& row : rows) {
    nlohmann::json rec{{"record", "row"},
                       {"instance", row.name},
                       {"makespan", row.makespan},
                       {"seconds", row.seconds}};
    if (row.has_gap) rec["gap"] = row.gap_percent;
    out << rec.dump() << '\n';
  }
  return out.str();
}

}  // namespace fjsrl
