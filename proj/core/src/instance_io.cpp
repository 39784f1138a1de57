#include "fjsrl/instance_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fjsrl/rng.hpp"
#include "json.hpp"

namespace fjsrl {

GenScheme parse_scheme(const std::string& name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(c)));
  if (lower == "sd1") return GenScheme::SD1;
  if (lower == "sd2") return GenScheme::SD2;
  throw std::invalid_argument("unknown generation scheme: " + name);
}

std::string scheme_name(GenScheme scheme) {
  return scheme == GenScheme::SD1 ? "sd1" : "sd2";
}

Instance generate_sd(const GenConfig& config, std::uint64_t index) {
  if (config.n_jobs < 1 || config.n_machines < 1) {
    throw std::invalid_argument("generator needs n_jobs >= 1, n_machines >= 1");
  }
  RngStream rng(config.seed, index);
  const int m = config.n_machines;
  const int ops_lo = static_cast<int>(std::ceil(0.8 * m));
  const int ops_hi = static_cast<int>(std::ceil(1.2 * m));
  const int dur_hi = config.scheme == GenScheme::SD1 ? 20 : 99;

  std::vector<std::vector<OperationSpec>> jobs(config.n_jobs);
  std::vector<int> machines(m);
  for (int i = 0; i < config.n_jobs; ++i) {
    const int n_i = static_cast<int>(rng.uniform_int(std::max(1, ops_lo), ops_hi));
    jobs[i].resize(n_i);
    for (int k = 0; k < n_i; ++k) {
      const int n_compat = static_cast<int>(rng.uniform_int(1, m));
      // Partial Fisher-Yates: first n_compat entries are a uniform sample
      // without replacement.
      for (int j = 0; j < m; ++j) machines[j] = j;
      for (int j = 0; j < n_compat; ++j) {
        const int pick = j + static_cast<int>(rng.uniform_int(0, m - 1 - j));
        std::swap(machines[j], machines[pick]);
      }
      OperationSpec& op = jobs[i][k];
      for (int j = 0; j < n_compat; ++j) {
        op.durations[machines[j]] =
            static_cast<int>(rng.uniform_int(1, dur_hi));
      }
    }
  }
  return Instance::create(m, std::move(jobs));
}

namespace {

// Whitespace-separated integer reader that tracks line numbers for errors.
class TokenReader {
 public:
  explicit TokenReader(const std::string& text, int first_line = 1)
      : text_(text), line_(first_line) {}

  bool next_token(std::string& tok) {
    tok.clear();
    while (pos_ < text_.size() && is_space(text_[pos_])) advance();
    if (pos_ >= text_.size()) return false;
    while (pos_ < text_.size() && !is_space(text_[pos_])) {
      tok.push_back(text_[pos_]);
      advance();
    }
    return true;
  }

  long long next_int(const char* what) {
    std::string tok;
    if (!next_token(tok)) {
      throw ParseError(line_, std::string("unexpected end of input, expected ") + what);
    }
    try {
      std::size_t used = 0;
      long long v = std::stoll(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw ParseError(line_, "expected integer for " + std::string(what) +
                                  ", got '" + tok + "'");
    }
  }

  bool at_end() {
    while (pos_ < text_.size() && is_space(text_[pos_])) advance();
    return pos_ >= text_.size();
  }

  int line() const { return line_; }

 private:
  static bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  }
  void advance() {
    if (text_[pos_] == '\n') ++line_;
    ++pos_;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace

Instance parse_fjs_text(const std::string& text) {
  // The header line carries "n m" plus an optional average-machines field
  // (integer or decimal) that is ignored; job data starts on line 2.
  const std::size_t eol = text.find('\n');
  const std::string header = text.substr(0, eol);
  TokenReader head(header);
  const long long n_jobs = head.next_int("job count");
  const long long n_machines = head.next_int("machine count");
  if (n_jobs < 1 || n_jobs > 1000000) throw ParseError(1, "bad job count");
  if (n_machines < 1 || n_machines > 1000000) {
    throw ParseError(1, "bad machine count");
  }
  const std::string body = eol == std::string::npos ? "" : text.substr(eol + 1);
  TokenReader in(body, 2);

  std::vector<std::vector<OperationSpec>> jobs(n_jobs);
  for (long long i = 0; i < n_jobs; ++i) {
    const long long n_i = in.next_int("operation count");
    if (n_i < 1) throw ParseError(in.line(), "job must have >= 1 operation");
    jobs[i].resize(n_i);
    for (long long k = 0; k < n_i; ++k) {
      const long long n_compat = in.next_int("compatible machine count");
      if (n_compat < 1 || n_compat > n_machines) {
        throw ParseError(in.line(), "bad compatible machine count");
      }
      for (long long c = 0; c < n_compat; ++c) {
        const long long machine = in.next_int("machine index");
        const long long dur = in.next_int("duration");
        if (machine < 1 || machine > n_machines) {
          throw ParseError(in.line(), "machine index " + std::to_string(machine) +
                                          " out of range 1.." +
                                          std::to_string(n_machines));
        }
        if (dur <= 0) throw ParseError(in.line(), "duration must be positive");
        // 1-based in the file, 0-based internally.
        jobs[i][k].durations[static_cast<int>(machine - 1)] =
            static_cast<int>(dur);
      }
    }
  }
  if (!in.at_end()) {
    throw ParseError(in.line(), "unexpected trailing data after last job");
  }
  try {
    return Instance::create(static_cast<int>(n_machines), std::move(jobs));
  } catch (const std::invalid_argument& err) {
    throw ParseError(in.line(), err.what());
  }
}

std::string emit_fjs_text(const Instance& instance) {
  std::ostringstream out;
  long long compat_total = 0;
  for (const auto& job : instance.jobs())
    for (const OperationSpec& op : job)
      compat_total += static_cast<long long>(op.durations.size());
  const double avg =
      static_cast<double>(compat_total) / static_cast<double>(instance.total_ops());
  char avg_buf[32];
  std::snprintf(avg_buf, sizeof(avg_buf), "%.4f", avg);
  out << instance.n_jobs() << ' ' << instance.n_machines() << ' ' << avg_buf
      << '\n';
  for (const auto& job : instance.jobs()) {
    out << job.size();
    for (const OperationSpec& op : job) {
      out << ' ' << op.durations.size();
      for (const auto& [machine, dur] : op.durations) {
        out << ' ' << machine + 1 << ' ' << dur;
      }
    }
    out << '\n';
  }
  return out.str();
}

namespace {

using nlohmann::json;

json instance_to_json(const Instance& instance) {
  json jobs = json::array();
  for (const auto& job : instance.jobs()) {
    json ops = json::array();
    for (const OperationSpec& op : job) {
      json durs = json::object();
      for (const auto& [machine, dur] : op.durations) {
        durs[std::to_string(machine)] = dur;
      }
      ops.push_back(std::move(durs));
    }
    jobs.push_back(std::move(ops));
  }
  return json{{"n_jobs", instance.n_jobs()},
              {"n_machines", instance.n_machines()},
              {"jobs", std::move(jobs)}};
}

}  // namespace

std::string serialize_instance(const Instance& instance) {
  return instance_to_json(instance).dump(2) + "\n";
}

Instance parse_instance(const std::string& bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& err) {
    throw ParseError(1, std::string("invalid JSON: ") + err.what());
  }
  try {
    const int n_jobs = doc.at("n_jobs").get<int>();
    const int n_machines = doc.at("n_machines").get<int>();
    const json& jjobs = doc.at("jobs");
    if (!jjobs.is_array() || static_cast<int>(jjobs.size()) != n_jobs) {
      throw std::invalid_argument("jobs array does not match n_jobs");
    }
    std::vector<std::vector<OperationSpec>> jobs(n_jobs);
    for (int i = 0; i < n_jobs; ++i) {
      const json& jops = jjobs.at(i);
      if (!jops.is_array() || jops.empty()) {
        throw std::invalid_argument("job " + std::to_string(i) +
                                    " must be a non-empty array");
      }
      jobs[i].resize(jops.size());
      for (std::size_t k = 0; k < jops.size(); ++k) {
        for (const auto& [key, value] : jops.at(k).items()) {
          jobs[i][k].durations[std::stoi(key)] = value.get<int>();
        }
      }
    }
    return Instance::create(n_machines, std::move(jobs));
  } catch (const json::exception& err) {
    throw ParseError(1, std::string("bad instance document: ") + err.what());
  } catch (const std::invalid_argument& err) {
    throw ParseError(1, std::string("bad instance document: ") + err.what());
  }
}

std::string serialize_schedule(const Schedule& schedule) {
  json arr = json::array();
  for (const Assignment& a : schedule.assignments) {
    arr.push_back(json{{"job", a.job_id},
                       {"op", a.op_index},
                       {"machine", a.machine_id},
                       {"start", a.start},
                       {"end", a.end}});
  }
  return json{{"assignments", std::move(arr)}}.dump(2) + "\n";
}

Schedule parse_schedule(const std::string& bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& err) {
    throw ParseError(1, std::string("invalid JSON: ") + err.what());
  }
  try {
    Schedule s;
    for (const json& ja : doc.at("assignments")) {
      Assignment a;
      a.job_id = ja.at("job").get<int>();
      a.op_index = ja.at("op").get<int>();
      a.machine_id = ja.at("machine").get<int>();
      a.start = ja.at("start").get<long long>();
      a.end = ja.at("end").get<long long>();
      s.assignments.push_back(a);
    }
    return s;
  } catch (const json::exception& err) {
    throw ParseError(1, std::string("bad schedule document: ") + err.what());
  }
}

}  // namespace fjsrl
