#include "doctest.h"

#include <cmath>

#include "fjsrl/env.hpp"
#include "fjsrl/instance_io.hpp"
#include "fjsrl/rng.hpp"
#include "oracles.hpp"

using namespace fjsrl;

TEST_CASE("reset exposes exactly the first ops as candidates") {
  const Instance inst = oracle::tiny_oracle_instance();
  EnvState state(inst);
  const auto cands = state.candidates();
  REQUIRE(cands.size() == 4);  // J0 op0 on {0,1}, J1 op0 on {0,1}
  CHECK(cands[0] == CandidatePair{0, 0, 0});
  CHECK(cands[1] == CandidatePair{0, 0, 1});
  CHECK(cands[2] == CandidatePair{1, 0, 0});
  CHECK(cands[3] == CandidatePair{1, 0, 1});
}

TEST_CASE("single 1-op job: candidate count is its compatible set") {
  const Instance inst = oracle::make_instance(3, {{{{0, 4}, {2, 6}}}});
  EnvState state(inst);
  CHECK(state.candidates().size() == 2);
}

TEST_CASE("candidate count equals sum over unfinished jobs") {
  GenConfig cfg;
  cfg.n_jobs = 10;
  cfg.n_machines = 5;
  cfg.seed = 1;
  const Instance inst = generate_sd(cfg, 0);
  EnvState state(inst);
  const auto cands = state.candidates();
  CHECK(cands.size() >= 10);
  CHECK(cands.size() <= 50);
  std::size_t expected = 0;
  for (int i = 0; i < inst.n_jobs(); ++i) {
    expected += inst.op(i, 0).durations.size();
  }
  CHECK(cands.size() == expected);
}

TEST_CASE("step start time is the max of machine and job clocks") {
  // Two jobs sharing machine 0; force machine free at 4, job ready at 7.
  const Instance inst = oracle::make_instance(
      2, {{{{1, 7}}, {{0, 2}}}, {{{0, 4}}}});
  EnvState state(inst);
  CHECK(state.step({1, 0, 0}).done == false);  // machine 0 busy [0,4)
  state.step({0, 0, 1});                       // job 0 ready at 7
  state.step({0, 1, 0});                       // max(4, 7) = 7
  const Schedule s = state.schedule();
  for (const Assignment& a : s.assignments) {
    if (a.job_id == 0 && a.op_index == 1) {
      CHECK(a.start == 7);
      CHECK(a.end == 9);
    }
  }
  CHECK(validate_schedule(inst, s).empty());
}

TEST_CASE("first step always starts at zero") {
  const Instance inst = oracle::tiny_oracle_instance();
  EnvState state(inst);
  state.step({0, 0, 1});
  CHECK(state.schedule().assignments[0].start == 0);
}

TEST_CASE("step rejects infeasible pairs") {
  const Instance inst = oracle::tiny_oracle_instance();
  EnvState state(inst);
  CHECK_THROWS_AS(state.step({0, 1, 0}), std::invalid_argument);  // not front
  state.step({0, 0, 0});
  CHECK_THROWS_AS(state.step({0, 0, 0}), std::invalid_argument);  // already done
  CHECK_THROWS_AS(state.step({1, 0, 2}), std::invalid_argument);  // bad machine
}

TEST_CASE("completion estimates chain mean durations") {
  // 1 job, 2 ops, single machine each, durations 3 then 4.
  const Instance inst = oracle::make_instance(1, {{{{0, 3}}, {{0, 4}}}});
  EnvState state(inst);
  const auto est = state.estimate_completion_times();
  REQUIRE(est.size() == 2);
  CHECK(est[0] == doctest::Approx(3.0));
  CHECK(est[1] == doctest::Approx(7.0));
  CHECK(state.estimated_makespan() == doctest::Approx(7.0));
}

TEST_CASE("min-duration estimate variant") {
  // Op durations {3, 5} then {4, 8}: the mean chain gives 4 and 10, the
  // min-duration chain 3 and 7.
  const Instance inst =
      oracle::make_instance(2, {{{{0, 3}, {1, 5}}, {{0, 4}, {1, 8}}}});
  EnvState mean_state(inst);
  const auto mean_est = mean_state.estimate_completion_times();
  CHECK(mean_est[0] == doctest::Approx(4.0));
  CHECK(mean_est[1] == doctest::Approx(10.0));

  EnvState min_state(inst, EstimateMode::MinDuration);
  const auto min_est = min_state.estimate_completion_times();
  CHECK(min_est[0] == doctest::Approx(3.0));
  CHECK(min_est[1] == doctest::Approx(7.0));

  // The telescoping identity holds for either estimate mode.
  EnvState rollout(inst, EstimateMode::MinDuration);
  const double initial = rollout.estimated_makespan();
  double rewards = 0.0;
  while (!rollout.done()) rewards += rollout.step(rollout.candidates()[0]).reward;
  CHECK(std::fabs(rewards - (initial - static_cast<double>(
                                           makespan(rollout.schedule())))) <=
        1e-9);
}

TEST_CASE("terminal estimates equal actual completions") {
  const Instance inst = oracle::tiny_oracle_instance();
  EnvState state(inst);
  while (!state.done()) state.step(state.candidates()[0]);
  const auto est = state.estimate_completion_times();
  const Schedule s = state.schedule();
  for (const Assignment& a : s.assignments) {
    CHECK(est[inst.op_row(a.job_id, a.op_index)] ==
          doctest::Approx(static_cast<double>(a.end)));
  }
  CHECK(state.estimated_makespan() ==
        doctest::Approx(static_cast<double>(makespan(s))));
}

TEST_CASE("feature shapes and flag columns") {
  GenConfig cfg;
  cfg.n_jobs = 6;
  cfg.n_machines = 4;
  cfg.seed = 8;
  const Instance inst = generate_sd(cfg, 2);
  EnvState state(inst);
  RngStream rng(0, 0);

  for (int step = 0; !state.done(); ++step) {
    const FeatureBundle fb = state.extract_features();
    CHECK(fb.x_op.size() ==
          static_cast<std::size_t>(inst.total_ops()) * FeatureBundle::kOpFeatures);
    CHECK(fb.x_ma.size() ==
          static_cast<std::size_t>(inst.n_machines()) * FeatureBundle::kMachineFeatures);

    // Scheduled flag matches the number of executed steps.
    int scheduled = 0;
    for (int r = 0; r < fb.n_ops; ++r) {
      const double flag = fb.x_op[r * FeatureBundle::kOpFeatures];
      CHECK((flag == 0.0 || flag == 1.0));
      scheduled += flag == 1.0 ? 1 : 0;
    }
    CHECK(scheduled == step);

    // Mask row sums equal each front op's compatible machine count.
    for (std::size_t r = 0; r < fb.front_rows.size(); ++r) {
      int sum = 0;
      for (int j = 0; j < fb.n_machines; ++j) {
        sum += fb.pair_mask[r * fb.n_machines + j];
      }
      const int row = fb.front_rows[r];
      const int job = fb.job_of_row[row];
      const int k = row - inst.job_row_offset(job);
      CHECK(sum == static_cast<int>(inst.op(job, k).durations.size()));
    }

    for (double v : fb.x_op) CHECK(std::isfinite(v));
    for (double v : fb.x_ma) CHECK(std::isfinite(v));

    const auto cands = state.candidates();
    state.step(cands[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(cands.size()) - 1))]);
  }
}

TEST_CASE("random rollouts: feasibility, telescoping, monotone clocks") {
  RngStream pick(42, 0);
  for (std::uint64_t idx = 0; idx < 60; ++idx) {
    GenConfig cfg;
    cfg.scheme = idx % 2 == 0 ? GenScheme::SD1 : GenScheme::SD2;
    cfg.n_jobs = 3 + static_cast<int>(idx % 5);
    cfg.n_machines = 2 + static_cast<int>(idx % 3);
    cfg.seed = 100 + idx;
    const Instance inst = generate_sd(cfg, idx);

    EnvState state(inst);
    const double initial_estimate = state.estimated_makespan();
    double reward_sum = 0.0;
    int steps = 0;
    std::vector<long long> prev_free(inst.n_machines(), 0);
    std::vector<long long> prev_ready(inst.n_jobs(), 0);
    while (!state.done()) {
      const auto cands = state.candidates();
      REQUIRE(!cands.empty());
      const auto choice = static_cast<std::size_t>(
          pick.uniform_int(0, static_cast<std::int64_t>(cands.size()) - 1));
      reward_sum += state.step(cands[choice]).reward;
      ++steps;
      for (int j = 0; j < inst.n_machines(); ++j) {
        CHECK(state.machine_free(j) >= prev_free[j]);
        prev_free[j] = state.machine_free(j);
      }
      for (int i = 0; i < inst.n_jobs(); ++i) {
        CHECK(state.job_ready(i) >= prev_ready[i]);
        prev_ready[i] = state.job_ready(i);
      }
    }
    CHECK(steps == inst.total_ops());
    CHECK(state.candidates().empty());
    const Schedule s = state.schedule();
    CHECK(validate_schedule(inst, s).empty());
    const double telescoped =
        initial_estimate - static_cast<double>(makespan(s));
    CHECK(std::fabs(reward_sum - telescoped) <= 1e-9);
  }
}
