#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "fjsrl/instance.hpp"
#include "fjsrl/schedule.hpp"

namespace fjsrl {

enum class GenScheme { SD1, SD2 };

GenScheme parse_scheme(const std::string& name);
std::string scheme_name(GenScheme scheme);

struct GenConfig {
  GenScheme scheme = GenScheme::SD1;
  int n_jobs = 10;
  int n_machines = 5;
  std::uint64_t seed = 0;
};

// Deterministic synthetic instance, drawn from the RngStream keyed by
// (config.seed, index). Per job: op count ~ U(ceil(0.8m), ceil(1.2m));
// per op: compatible-machine count ~ U(1, m) without replacement, duration
// per machine ~ U(1, 20) for SD1 and U(1, 99) for SD2.
Instance generate_sd(const GenConfig& config, std::uint64_t index);

struct ParseError : std::runtime_error {
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line(line) {}
  int line;
};

// Standard benchmark text format (mk / la files): header "n m [avg]", then
// one line per job: n_i, then per op the machine count followed by
// (machine, duration) pairs. Machine indices are 1-based in the file.
Instance parse_fjs_text(const std::string& text);
std::string emit_fjs_text(const Instance& instance);

// Canonical JSON instance document: {n_jobs, n_machines, jobs: [[{"m": p}]]}
// with 0-based machine keys. parse_instance is the exact inverse.
std::string serialize_instance(const Instance& instance);
Instance parse_instance(const std::string& bytes);

std::string serialize_schedule(const Schedule& schedule);
Schedule parse_schedule(const std::string& bytes);

}  // namespace fjsrl
