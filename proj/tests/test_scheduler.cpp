#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/generators.hpp"
#include "teda/oracle.hpp"
#include "teda/prng.hpp"
#include "teda/scheduler.hpp"

using namespace teda;

namespace {

// Encodes (launch step, lookahead) into action values so a hand trace can
// tell exactly which chunk elements reached the output.
PolicyHandle traceable_policy(int chunk_size) {
  PolicyHandle p;
  p.predict = [chunk_size](const Observation&, int start) {
    std::vector<ActionVector> chunk;
    for (int j = 0; j < chunk_size; ++j) {
      chunk.push_back({start + j / 100.0});
    }
    return chunk;
  };
  return p;
}

SchedulerConfig small_config(int k, int episode, double decay = 0.01,
                             int action_dim = 1) {
  SchedulerConfig cfg;
  cfg.chunk_size = k;
  cfg.episode_length = episode;
  cfg.weight_decay = decay;
  cfg.action_dim = action_dim;
  return cfg;
}

DerivedSchedule schedule_for(const SchedulerConfig& cfg, int drop) {
  DerivedSchedule s;
  s.dropped_per_chunk = drop;
  s.max_predictions = 2 + (cfg.episode_length - 1) / drop;
  s.buffer_cols = 1 + (s.max_predictions - 2) * drop + cfg.chunk_size;
  s.exec_hz = 25.0;
  s.pred_hz = 25.0 / drop;
  return s;
}

}  // namespace

TEST_CASE("EnsembleBuffer enforces write-once contiguous rows") {
  EnsembleBuffer buffer(3, 10);
  PredictionRecord rec;
  rec.start_step = 0;
  rec.completion_step = 1;
  rec.actions = {{1.0}, {2.0}, {3.0}};
  buffer.write_row(0, rec);
  CHECK(buffer.rows_used() == 1);
  CHECK_THROWS_AS(buffer.write_row(0, rec), std::logic_error);   // rewrite
  CHECK_THROWS_AS(buffer.write_row(2, rec), std::logic_error);   // gap
  PredictionRecord wide = rec;
  wide.start_step = 8;  // span [8, 10] exceeds 10 columns
  CHECK_THROWS_AS(buffer.write_row(1, wide), std::logic_error);

  CHECK(buffer.cell(0, 1) != nullptr);
  CHECK((*buffer.cell(0, 1))[0] == 2.0);
  CHECK(buffer.cell(0, 3) == nullptr);
  CHECK(buffer.cell(1, 0) == nullptr);
}

TEST_CASE("init_episode allocates the derived geometry with an empty buffer") {
  const SchedulerConfig cfg = small_config(25, 120);
  const DerivedSchedule sched = schedule_for(cfg, 3);
  Chunk initial{0, traceable_policy(25).predict(Observation{}, 0)};
  EnsembleScheduler s = init_episode(cfg, sched, std::move(initial));
  CHECK(s.buffer().rows() == 41);
  CHECK(s.buffer().cols() == 143);
  CHECK(s.buffer().rows_used() == 0);  // staged, not yet committed
  CHECK(s.current_step() == 0);
}

TEST_CASE("init_episode accepts the degenerate one-step episode") {
  const SchedulerConfig cfg = small_config(1, 1);
  const DerivedSchedule sched = schedule_for(cfg, 1);
  CHECK(sched.max_predictions == 2);
  CHECK(sched.buffer_cols == 2);
  Chunk initial{0, {{0.5}}};
  EnsembleScheduler s = init_episode(cfg, sched, std::move(initial));
  CHECK(s.buffer().rows() == 2);
  CHECK(s.buffer().cols() == 2);
}

TEST_CASE("init_episode rejects a short initial chunk") {
  const SchedulerConfig cfg = small_config(25, 120);
  const DerivedSchedule sched = schedule_for(cfg, 3);
  Chunk short_chunk{0, traceable_policy(24).predict(Observation{}, 0)};
  CHECK_THROWS_AS(init_episode(cfg, sched, std::move(short_chunk)),
                  std::invalid_argument);
}

TEST_CASE("hand trace, drop count 3: commits, drops and ensembles") {
  const SchedulerConfig cfg = small_config(25, 120, 0.01);
  const DerivedSchedule sched = schedule_for(cfg, 3);
  const PolicyHandle policy = traceable_policy(25);
  const ObservationFn observe = empty_observations();

  Chunk initial{0, policy.predict(Observation{}, 0)};
  EnsembleScheduler s = init_episode(cfg, sched, std::move(initial));
  SyncChunkSource source(policy, observe);

  // t=1: the pre-episode chunk commits into row 0 and is the only source.
  StepResult r1 = s.step(source);
  CHECK(r1.committed_row == 0);
  CHECK(r1.launched);
  CHECK(r1.ensemble_size == 1);
  CHECK(r1.action[0] == 0.01);  // initial chunk's step-1 element, untouched
  CHECK(r1.drops_total == 0);

  StepResult r2 = s.step(source);
  CHECK_FALSE(r2.launched);
  CHECK(r2.ensemble_size == 1);
  CHECK(r2.action[0] == 0.02);
  StepResult r3 = s.step(source);
  CHECK(r3.ensemble_size == 1);
  CHECK(r3.action[0] == 0.03);

  // t=4: the chunk launched at t=1 commits; its targets 1..3 lagged and
  // are dropped; the ensemble is {initial, launch-1}.
  StepResult r4 = s.step(source);
  CHECK(r4.committed_row == 1);
  CHECK(r4.drops_total == 3);
  CHECK(r4.ensemble_size == 2);
  const double w0 = 1.0;
  const double w1 = std::exp(-0.01);
  const double expected4 = (w0 * 0.04 + w1 * 1.03) / (w0 + w1);
  CHECK(r4.action[0] == doctest::Approx(expected4).epsilon(1e-15));

  // The dropped elements (launch-1 targets 1..3) are in the buffer's past
  // columns but never surfaced in any returned action.
  CHECK(s.buffer().cell(1, 1) != nullptr);
  CHECK((*s.buffer().cell(1, 1))[0] == 1.0);

  StepResult r5 = s.step(source);
  CHECK(r5.ensemble_size == 2);
  StepResult r6 = s.step(source);
  CHECK(r6.ensemble_size == 2);
  StepResult r7 = s.step(source);
  CHECK(r7.committed_row == 2);
  CHECK(r7.drops_total == 6);
  CHECK(r7.ensemble_size == 3);
}

TEST_CASE("run_episode accounting on the task-1 geometry") {
  const SchedulerConfig cfg = small_config(25, 120, 0.01, 2);
  const DerivedSchedule sched = schedule_for(cfg, 3);
  ScriptedPolicy scripted;
  scripted.target = sine_trajectory(2, 1.0, 50.0);
  scripted.staleness = linear_staleness(0.01);
  const PolicyHandle policy = make_scripted_policy(std::move(scripted), 25);

  const EpisodeResult result = run_episode(cfg, sched, policy, empty_observations());
  CHECK(result.trajectory.size() == 120);
  // Launches at t = 1, 4, ..., 118 plus the pre-episode prediction.
  CHECK(result.predictions_launched == 41);
  CHECK(result.predictions_launched == sched.max_predictions);
  // The final launch is still in flight at episode end.
  CHECK(result.predictions_committed == 40);
  CHECK(result.drops.total == 3 * (result.predictions_committed - 1));
  CHECK(result.drops.per_prediction.front() == 0);
  for (std::size_t i = 1; i < result.drops.per_prediction.size(); ++i) {
    CHECK(result.drops.per_prediction[i] == 3);
  }
  const int bound = (25 + 3 - 1) / 3;  // ceil(k / D)
  for (int size : result.ensemble_sizes) {
    CHECK(size >= 1);
    CHECK(size <= bound);
  }
}

TEST_CASE("a constant policy yields a constant trajectory") {
  const SchedulerConfig cfg = small_config(10, 60, 0.05, 3);
  const DerivedSchedule sched = schedule_for(cfg, 4);
  ScriptedPolicy scripted;
  scripted.target = constant_trajectory({0.5, -1.5, 2.0});
  const PolicyHandle policy = make_scripted_policy(std::move(scripted), 10);

  const EpisodeResult result = run_episode(cfg, sched, policy, empty_observations());
  for (const ActionVector& a : result.trajectory) {
    CHECK(a[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(a[1] == doctest::Approx(-1.5).epsilon(1e-15));
    CHECK(a[2] == doctest::Approx(2.0).epsilon(1e-15));
  }
}

TEST_CASE("episodes are bitwise deterministic") {
  SplitMix64 gen(11);
  const auto c = testing::make_case(gen);
  const DerivedSchedule sched = derive_schedule(c.cfg, c.tm);
  const EpisodeResult a = run_episode(c.cfg, sched, c.policy, c.observe);
  const EpisodeResult b = run_episode(c.cfg, sched, c.policy, c.observe);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (std::size_t t = 0; t < a.trajectory.size(); ++t) {
    CHECK(a.trajectory[t] == b.trajectory[t]);
  }
}

TEST_CASE("incremental scheduler agrees with the brute-force oracle") {
  SplitMix64 gen(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const auto c = testing::make_case(gen);
    const DerivedSchedule sched = derive_schedule(c.cfg, c.tm);
    REQUIRE(sched.dropped_per_chunk == c.target_drop);
    const EpisodeResult run = run_episode(c.cfg, sched, c.policy, c.observe);
    const auto reference =
        oracle_trajectory(c.cfg, sched.dropped_per_chunk, sched.dropped_per_chunk,
                          true, c.policy, c.observe);
    CHECK(testing::max_abs_diff(run.trajectory, reference) <= 1e-12);
  }
}

TEST_CASE("stepping past the episode end is an error") {
  const SchedulerConfig cfg = small_config(4, 2);
  const DerivedSchedule sched = schedule_for(cfg, 1);
  const PolicyHandle policy = traceable_policy(4);
  Chunk initial{0, policy.predict(Observation{}, 0)};
  EnsembleScheduler s = init_episode(cfg, sched, std::move(initial));
  SyncChunkSource source(policy, empty_observations());
  s.step(source);
  s.step(source);
  CHECK(s.done());
  CHECK_THROWS_AS(s.step(source), std::logic_error);
}

TEST_CASE("an uncoverable column is a hard fault at the step level") {
  // k=4 with a drop count of 3 leaves step 5 unserved by any chunk.
  const SchedulerConfig cfg = small_config(4, 10);
  const PolicyHandle policy = traceable_policy(4);
  SchedulerParams params = make_scheduler_params(cfg, 3, 3);
  Chunk initial{0, policy.predict(Observation{}, 0)};
  EnsembleScheduler s(params, std::move(initial));
  SyncChunkSource source(policy, empty_observations());
  for (int t = 1; t <= 4; ++t) {
    s.step(source);
  }
  CHECK_THROWS_AS(s.step(source), std::logic_error);

  // run_episode rejects the same geometry up front.
  const DerivedSchedule sched = schedule_for(cfg, 3);
  CHECK_THROWS_AS(run_episode(cfg, sched, policy, empty_observations()),
                  InfeasibleScheduleError);
  CHECK(first_uncovered_column(4, 10, 3, 3, true) == 5);
  CHECK(first_uncovered_column(25, 120, 3, 3, true) == 0);
}
