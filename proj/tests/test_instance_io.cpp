#include "doctest.h"

#include <set>

#include "fjsrl/instance_io.hpp"
#include "oracles.hpp"

using namespace fjsrl;

TEST_CASE("SD1 respects machine-count and duration bounds") {
  GenConfig cfg;
  cfg.scheme = GenScheme::SD1;
  cfg.n_jobs = 10;
  cfg.n_machines = 5;
  cfg.seed = 3;
  for (std::uint64_t idx = 0; idx < 50; ++idx) {
    const Instance inst = generate_sd(cfg, idx);
    CHECK(inst.n_jobs() == 10);
    CHECK(inst.n_machines() == 5);
    for (const auto& job : inst.jobs()) {
      CHECK(job.size() >= 4);  // ceil(0.8 * 5)
      CHECK(job.size() <= 6);  // ceil(1.2 * 5)
      for (const OperationSpec& op : job) {
        CHECK(op.durations.size() >= 1);
        CHECK(op.durations.size() <= 5);
        for (const auto& [m, p] : op.durations) {
          CHECK(m >= 0);
          CHECK(m < 5);
          CHECK(p >= 1);
          CHECK(p <= 20);
        }
      }
    }
  }
}

TEST_CASE("SD2 uses the wide duration range") {
  GenConfig cfg;
  cfg.scheme = GenScheme::SD2;
  cfg.n_jobs = 10;
  cfg.n_machines = 5;
  cfg.seed = 3;
  int max_seen = 0;
  for (std::uint64_t idx = 0; idx < 50; ++idx) {
    const Instance inst = generate_sd(cfg, idx);
    for (const auto& job : inst.jobs())
      for (const OperationSpec& op : job)
        for (const auto& [m, p] : op.durations) {
          CHECK(p >= 1);
          CHECK(p <= 99);
          max_seen = std::max(max_seen, p);
        }
  }
  CHECK(max_seen > 20);  // the wide range is actually exercised
}

TEST_CASE("10,000-instance sample hits the duration bounds of both schemes") {
  for (auto [scheme, dur_hi] : {std::pair{GenScheme::SD1, 20},
                                std::pair{GenScheme::SD2, 99}}) {
    GenConfig cfg;
    cfg.scheme = scheme;
    cfg.n_jobs = 3;
    cfg.n_machines = 3;
    cfg.seed = 12;
    int lo = 1000, hi = 0;
    std::set<std::size_t> compat_counts;
    for (std::uint64_t idx = 0; idx < 10000; ++idx) {
      const Instance inst = generate_sd(cfg, idx);
      for (const auto& job : inst.jobs())
        for (const OperationSpec& op : job) {
          compat_counts.insert(op.durations.size());
          for (const auto& [m, p] : op.durations) {
            lo = std::min(lo, p);
            hi = std::max(hi, p);
          }
        }
    }
    CHECK(lo == 1);
    CHECK(hi == dur_hi);
    CHECK(compat_counts.count(1) == 1);  // U(1, m) spans its range
    CHECK(compat_counts.count(3) == 1);
  }
}

TEST_CASE("generation is deterministic in (config, index)") {
  GenConfig cfg;
  cfg.scheme = GenScheme::SD2;
  cfg.n_jobs = 6;
  cfg.n_machines = 4;
  cfg.seed = 999;
  for (std::uint64_t idx : {0ull, 7ull, 31ull}) {
    const Instance a = generate_sd(cfg, idx);
    const Instance b = generate_sd(cfg, idx);
    CHECK(a == b);
    CHECK(serialize_instance(a) == serialize_instance(b));
  }
  // Different index gives a different instance (overwhelmingly likely).
  CHECK_FALSE(generate_sd(cfg, 0) == generate_sd(cfg, 1));
}

TEST_CASE("fjs text: minimal synthetic document") {
  // Header "n m avg", then n_i and one (machine-count, machine, duration)
  // group per op. One job, one op, machine 1, duration 7:
  const Instance inst = parse_fjs_text("1 1 1\n1 1 1 7\n");
  CHECK(inst.n_jobs() == 1);
  CHECK(inst.n_machines() == 1);
  REQUIRE(inst.job(0).size() == 1);
  REQUIRE(inst.op(0, 0).durations.size() == 1);
  CHECK(inst.op(0, 0).durations.at(0) == 7);  // file machine 1 -> index 0

  // Surplus tokens are rejected rather than silently dropped.
  CHECK_THROWS_AS(parse_fjs_text("1 1 1\n1 1 1 1 7\n"), ParseError);
}

TEST_CASE("fjs text: 10x6 header parses like the public mk-format files") {
  GenConfig cfg;
  cfg.n_jobs = 10;
  cfg.n_machines = 6;
  cfg.seed = 4;
  const Instance generated = generate_sd(cfg, 0);
  const std::string text = emit_fjs_text(generated);
  CHECK(text.rfind("10 6 ", 0) == 0);
  const Instance parsed = parse_fjs_text(text);
  CHECK(parsed.n_jobs() == 10);
  CHECK(parsed.n_machines() == 6);
  CHECK(parsed == generated);
}

TEST_CASE("fjs parse errors carry line numbers") {
  SUBCASE("machine index out of range") {
    try {
      parse_fjs_text("1 2\n1 1 3 5\n");
      FAIL("expected ParseError");
    } catch (const ParseError& err) {
      CHECK(err.line == 2);
    }
  }
  SUBCASE("non-positive duration") {
    CHECK_THROWS_AS(parse_fjs_text("1 1\n1 1 1 0\n"), ParseError);
  }
  SUBCASE("malformed counts") {
    CHECK_THROWS_AS(parse_fjs_text("x 1\n"), ParseError);
    CHECK_THROWS_AS(parse_fjs_text("1 1\n1 1 1\n"), ParseError);
  }
}

TEST_CASE("json round trip on generated instances") {
  GenConfig cfg;
  cfg.scheme = GenScheme::SD1;
  cfg.n_jobs = 10;
  cfg.n_machines = 5;
  cfg.seed = 21;
  for (std::uint64_t idx = 0; idx < 20; ++idx) {
    const Instance inst = generate_sd(cfg, idx);
    CHECK(parse_instance(serialize_instance(inst)) == inst);
    CHECK(parse_fjs_text(emit_fjs_text(inst)) == inst);
  }
}

TEST_CASE("json documents with invariant violations are rejected") {
  CHECK_THROWS_AS(
      parse_instance(R"({"n_jobs":1,"n_machines":1,"jobs":[[{"0":0}]]})"),
      ParseError);
  CHECK_THROWS_AS(
      parse_instance(R"({"n_jobs":1,"n_machines":1,"jobs":[[{"3":5}]]})"),
      ParseError);
  CHECK_THROWS_AS(parse_instance(R"({"n_jobs":2,"n_machines":1,"jobs":[[{"0":5}]]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_instance("not json at all"), ParseError);
}

TEST_CASE("schedule json round trip") {
  Schedule s;
  s.assignments.push_back({0, 0, 2, 0, 9});
  s.assignments.push_back({1, 0, 0, 3, 4});
  const Schedule back = parse_schedule(serialize_schedule(s));
  REQUIRE(back.assignments.size() == 2);
  CHECK(back.assignments[0].machine_id == 2);
  CHECK(back.assignments[1].start == 3);
  CHECK(back.assignments[1].end == 4);
}
