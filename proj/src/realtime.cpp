#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>

#include "teda/sim.hpp"

namespace teda {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t us_between(Clock::time_point from, Clock::time_point to) {
  return std::chrono::duration_cast<std::chrono::microseconds>(to - from).count();
}

/// Prediction serviced by a dedicated thread. launch() posts the job and
/// returns immediately; the thread computes the chunk, sleeps out the
/// declared latency, and publishes. collect() blocks until the chunk is up,
/// which on schedule means not at all for the pipelined mode and exactly
/// the prediction latency for serial chunking.
class ThreadedChunkSource final : public ChunkSource {
 public:
  ThreadedChunkSource(const PolicyHandle& policy, const ObservationFn& observe,
                      std::int64_t latency_us)
      : policy_(policy),
        observe_(observe),
        latency_(std::chrono::microseconds(latency_us)),
        worker_([this] { run(); }) {}

  ~ThreadedChunkSource() override {
    {
      std::lock_guard lock(mutex_);
      shutdown_ = true;
    }
    cv_.notify_all();
    worker_.join();
  }

  void launch(int start_step) override {
    Job job{start_step, observe_(start_step), Clock::now()};
    {
      std::lock_guard lock(mutex_);
      job_ = std::move(job);
    }
    cv_.notify_all();
  }

  Chunk collect() override {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [this] { return done_.has_value(); });
    Chunk out = std::move(*done_);
    done_.reset();
    return out;
  }

  bool ready() const {
    std::lock_guard lock(mutex_);
    return done_.has_value();
  }

  Clock::time_point last_launch_wall() const {
    std::lock_guard lock(mutex_);
    return last_launch_;
  }

 private:
  struct Job {
    int start_step;
    Observation observation;
    Clock::time_point posted;
  };

  void run() {
    std::unique_lock lock(mutex_);
    while (true) {
      cv_.wait(lock, [this] { return shutdown_ || job_.has_value(); });
      if (shutdown_) {
        return;
      }
      Job job = std::move(*job_);
      job_.reset();
      last_launch_ = job.posted;
      lock.unlock();
      Chunk chunk{job.start_step, policy_.predict(job.observation, job.start_step)};
      lock.lock();
      // Honor the declared latency on top of any real compute time, but
      // leave immediately if the executor is shutting down.
      cv_.wait_until(lock, job.posted + latency_, [this] { return shutdown_; });
      if (shutdown_) {
        return;
      }
      done_ = std::move(chunk);
      cv_.notify_all();
    }
  }

  const PolicyHandle& policy_;
  const ObservationFn& observe_;
  const std::chrono::microseconds latency_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::optional<Job> job_;
  std::optional<Chunk> done_;
  Clock::time_point last_launch_{};
  bool shutdown_ = false;
  std::thread worker_;
};

}  // namespace

SimResult run_realtime(const SchedulerConfig& cfg, const TimingModel& tm, Mode mode,
                       const PolicyHandle& policy, const ObservationFn& observe,
                       const ReferenceTrajectory& reference) {
  cfg.validate();
  tm.validate();

  const std::int64_t pred_us = tm.predictor_period_us();
  const std::int64_t exec_us = tm.executor_period_us();
  const auto pred_dur = std::chrono::microseconds(pred_us);
  const auto exec_dur = std::chrono::microseconds(exec_us);

  SimResult result;
  result.mode = mode;

  std::optional<EnsembleScheduler> scheduler;
  const Clock::time_point origin = Clock::now();

  switch (mode) {
    case Mode::teda: {
      const DerivedSchedule sched = derive_schedule(cfg, tm);
      ensure_pipelined_coverage(cfg, sched.dropped_per_chunk);
      result.schedule = sched;
      // The pre-episode prediction is the pipeline's one-time startup cost.
      Chunk initial{0, policy.predict(observe(0), 0)};
      std::this_thread::sleep_until(origin + pred_dur);
      scheduler.emplace(init_episode(cfg, sched, std::move(initial)));
      break;
    }
    case Mode::per_step_te: {
      ensure_pipelined_coverage(cfg, 1);
      Chunk initial{0, policy.predict(observe(0), 0)};
      scheduler.emplace(
          EnsembleScheduler(make_scheduler_params(cfg, 1, 1), std::move(initial)));
      break;
    }
    case Mode::open_loop:
      scheduler.emplace(EnsembleScheduler(
          make_scheduler_params(cfg, cfg.chunk_size, 0), std::nullopt));
      break;
  }

  result.trace.startup_us = mode == Mode::teda ? us_between(origin, Clock::now()) : 0;

  ThreadedChunkSource source(policy, observe, pred_us);

  const Clock::time_point episode_start = Clock::now();
  Clock::time_point last_apply = episode_start;
  for (int t = 1; t <= cfg.episode_length; ++t) {
    Clock::time_point tick;
    switch (mode) {
      case Mode::teda:
        tick = episode_start + (t - 1) * exec_dur;
        break;
      case Mode::per_step_te:
        tick = episode_start + (t - 1) * (pred_dur + exec_dur);
        break;
      case Mode::open_loop:
        tick = episode_start + ((t - 1) / cfg.chunk_size) * pred_dur +
               (t - 1) * exec_dur;
        break;
    }
    std::this_thread::sleep_until(tick);

    // A commit step must find the prediction finished; if the predictor
    // overran, wait it out (the trajectory stays exact) and log the miss.
    const auto completion = scheduler->pending_completion_step();
    if (mode == Mode::teda && completion.has_value() && *completion == t && t > 1 &&
        !source.ready()) {
      ++result.trace.deadline_misses;
    }

    StepResult r = scheduler->step(source);

    if (mode == Mode::per_step_te) {
      // Serial semantics: the action goes out only after this step's
      // prediction window has passed.
      std::this_thread::sleep_until(tick + pred_dur);
    }

    const Clock::time_point applied = Clock::now();
    const std::int64_t planned = us_between(episode_start, tick) +
                                 (mode == Mode::per_step_te ? pred_us : 0) +
                                 (mode == Mode::open_loop && r.launched ? pred_us : 0);
    const std::int64_t measured =
        us_between(episode_start, applied) + result.trace.startup_us;

    SimStep step;
    step.step = t;
    step.wall_us = measured;
    step.action = r.action;
    step.ensemble_size = r.ensemble_size;
    step.drops_cum = r.drops_total;
    step.stall_us = std::max<std::int64_t>(
        0, us_between(episode_start, applied) - planned);
    step.prediction_inflight =
        mode == Mode::teda && scheduler->pending_completion_step().has_value() &&
        us_between(source.last_launch_wall(), applied) < pred_us;
    result.trajectory.push_back(std::move(r.action));
    result.trace.steps.push_back(std::move(step));
    last_apply = applied;
  }

  std::this_thread::sleep_until(last_apply + exec_dur);
  result.trace.total_us =
      us_between(episode_start, Clock::now()) + result.trace.startup_us;

  // Scalar metrics: timing comes from the measured trace, everything else
  // from the (deterministic) value path.
  {
    MetricsReport m;
    const auto& steps = result.trace.steps;
    if (steps.size() >= 2) {
      m.per_step_s = static_cast<double>(steps.back().wall_us - steps.front().wall_us) /
                     static_cast<double>(steps.size() - 1) / 1e6;
    } else {
      m.per_step_s =
          static_cast<double>(result.trace.total_us - result.trace.startup_us) / 1e6;
    }
    m.total_wall_s = static_cast<double>(result.trace.total_us) / 1e6;
    m.startup_s = static_cast<double>(result.trace.startup_us) / 1e6;
    std::int64_t max_gap = 0;
    for (std::size_t i = 1; i < steps.size(); ++i) {
      max_gap = std::max(max_gap, steps[i].wall_us - steps[i - 1].wall_us);
    }
    m.max_gap_s = static_cast<double>(max_gap) / 1e6;
    m.dropped_total = steps.empty() ? 0 : steps.back().drops_cum;
    long long size_sum = 0;
    for (const SimStep& s : steps) {
      size_sum += s.ensemble_size;
      m.ensemble_size_max = std::max(m.ensemble_size_max, s.ensemble_size);
    }
    m.ensemble_size_mean =
        steps.empty() ? 0.0
                      : static_cast<double>(size_sum) / static_cast<double>(steps.size());
    for (std::size_t t = 1; t + 1 < result.trajectory.size(); ++t) {
      for (std::size_t d = 0; d < result.trajectory[t].size(); ++d) {
        const double second_diff = result.trajectory[t + 1][d] -
                                   2.0 * result.trajectory[t][d] +
                                   result.trajectory[t - 1][d];
        m.jitter = std::max(m.jitter, std::abs(second_diff));
      }
    }
    if (reference.has_value()) {
      double sq = 0.0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < result.trajectory.size(); ++i) {
        for (std::size_t d = 0; d < result.trajectory[i].size(); ++d) {
          const double diff = result.trajectory[i][d] - (*reference)[i][d];
          sq += diff * diff;
          ++n;
        }
      }
      m.trajectory_rmse = n > 0 ? std::sqrt(sq / static_cast<double>(n)) : 0.0;
    }
    m.predictions_launched =
        scheduler->predictions_launched() + (mode == Mode::open_loop ? 0 : 1);
    m.predictions_committed = scheduler->predictions_committed();
    result.metrics = m;
  }
  return result;
}

}  // namespace teda
