#include "teda/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace teda {

namespace {

struct MachineSetup {
  EnsembleScheduler scheduler;
  std::optional<DerivedSchedule> schedule;
};

MachineSetup build_machine(const SchedulerConfig& cfg, const TimingModel& tm,
                           Mode mode, const PolicyHandle& policy,
                           const ObservationFn& observe) {
  switch (mode) {
    case Mode::teda: {
      const DerivedSchedule sched = derive_schedule(cfg, tm);
      ensure_pipelined_coverage(cfg, sched.dropped_per_chunk);
      Chunk initial{0, policy.predict(observe(0), 0)};
      return {init_episode(cfg, sched, std::move(initial)), sched};
    }
    case Mode::per_step_te: {
      ensure_pipelined_coverage(cfg, 1);
      Chunk initial{0, policy.predict(observe(0), 0)};
      return {EnsembleScheduler(make_scheduler_params(cfg, 1, 1), std::move(initial)),
              std::nullopt};
    }
    case Mode::open_loop:
      return {EnsembleScheduler(make_scheduler_params(cfg, cfg.chunk_size, 0),
                                std::nullopt),
              std::nullopt};
  }
  throw std::logic_error("unknown mode");
}

double us_to_s(std::int64_t us) { return static_cast<double>(us) / 1e6; }

MetricsReport finalize_metrics(const SchedulerConfig& cfg, const TimingModel& tm,
                               Mode mode, const SimTrace& trace,
                               const std::vector<ActionVector>& trajectory,
                               long long launched, long long committed,
                               const ReferenceTrajectory& reference) {
  MetricsReport m;
  const double pred_us = static_cast<double>(tm.predictor_period_us());
  const double exec_us = static_cast<double>(tm.executor_period_us());
  switch (mode) {
    case Mode::teda:
      m.per_step_s = exec_us / 1e6;
      break;
    case Mode::per_step_te:
      m.per_step_s = (pred_us + exec_us) / 1e6;
      break;
    case Mode::open_loop:
      // One serial prediction amortized over the k steps it serves.
      m.per_step_s = (pred_us / cfg.chunk_size + exec_us) / 1e6;
      break;
  }
  m.total_wall_s = us_to_s(trace.total_us);
  m.startup_s = us_to_s(trace.startup_us);

  std::int64_t max_gap = 0;
  for (std::size_t i = 1; i < trace.steps.size(); ++i) {
    max_gap = std::max(max_gap, trace.steps[i].wall_us - trace.steps[i - 1].wall_us);
  }
  m.max_gap_s = us_to_s(max_gap);

  m.dropped_total = trace.steps.empty() ? 0 : trace.steps.back().drops_cum;
  long long size_sum = 0;
  for (const SimStep& s : trace.steps) {
    size_sum += s.ensemble_size;
    m.ensemble_size_max = std::max(m.ensemble_size_max, s.ensemble_size);
  }
  m.ensemble_size_mean = trace.steps.empty()
                             ? 0.0
                             : static_cast<double>(size_sum) /
                                   static_cast<double>(trace.steps.size());

  for (std::size_t t = 1; t + 1 < trajectory.size(); ++t) {
    for (std::size_t d = 0; d < trajectory[t].size(); ++d) {
      const double second_diff =
          trajectory[t + 1][d] - 2.0 * trajectory[t][d] + trajectory[t - 1][d];
      m.jitter = std::max(m.jitter, std::abs(second_diff));
    }
  }

  if (reference.has_value()) {
    if (reference->size() != trajectory.size()) {
      throw std::invalid_argument("reference trajectory length mismatch");
    }
    double sq = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 0; t < trajectory.size(); ++t) {
      if ((*reference)[t].size() != trajectory[t].size()) {
        throw std::invalid_argument("reference trajectory dimension mismatch");
      }
      for (std::size_t d = 0; d < trajectory[t].size(); ++d) {
        const double diff = trajectory[t][d] - (*reference)[t][d];
        sq += diff * diff;
        ++n;
      }
    }
    m.trajectory_rmse = n > 0 ? std::sqrt(sq / static_cast<double>(n)) : 0.0;
  }

  m.predictions_launched = launched;
  m.predictions_committed = committed;
  return m;
}

}  // namespace

SimResult simulate(const SchedulerConfig& cfg, const TimingModel& tm, Mode mode,
                   const PolicyHandle& policy, const ObservationFn& observe,
                   const ReferenceTrajectory& reference) {
  cfg.validate();
  tm.validate();

  MachineSetup setup = build_machine(cfg, tm, mode, policy, observe);
  EnsembleScheduler& scheduler = setup.scheduler;
  SyncChunkSource source(policy, observe);

  const std::int64_t pred_us = tm.predictor_period_us();
  const std::int64_t exec_us = tm.executor_period_us();

  SimResult result;
  result.mode = mode;
  result.schedule = setup.schedule;
  result.trace.startup_us = mode == Mode::teda ? pred_us : 0;

  // Virtual clock. Launch wall times drive completion checks for the
  // pipelined mode; the serial modes wait by construction.
  std::int64_t prev_apply = 0;
  std::int64_t inflight_from = 0;  // wall time of the outstanding launch
  std::int64_t inflight_until = mode == Mode::teda ? pred_us : 0;
  bool has_inflight = mode == Mode::teda;  // the pre-episode prediction

  for (int t = 1; t <= cfg.episode_length; ++t) {
    std::int64_t apply = 0;
    std::int64_t stall = 0;
    StepResult r = scheduler.step(source);

    switch (mode) {
      case Mode::teda: {
        const std::int64_t scheduled =
            t == 1 ? result.trace.startup_us : prev_apply + exec_us;
        if (r.committed_row.has_value()) {
          // The commit needs the prediction finished; with the derived drop
          // count the completion always lands on or before the tick.
          apply = std::max(scheduled, inflight_until);
          stall = apply - scheduled;
        } else {
          apply = scheduled;
        }
        if (r.launched) {
          inflight_from = apply;
          inflight_until = apply + pred_us;
          has_inflight = true;
        }
        break;
      }
      case Mode::per_step_te:
        apply = static_cast<std::int64_t>(t - 1) * (pred_us + exec_us) + pred_us;
        break;
      case Mode::open_loop: {
        const std::int64_t boundaries = (t - 1) / cfg.chunk_size + 1;
        apply = boundaries * pred_us + static_cast<std::int64_t>(t - 1) * exec_us;
        stall = r.launched ? pred_us : 0;
        break;
      }
    }

    SimStep step;
    step.step = t;
    step.wall_us = apply;
    step.action = r.action;
    step.ensemble_size = r.ensemble_size;
    step.drops_cum = r.drops_total;
    step.stall_us = stall;
    step.prediction_inflight =
        mode == Mode::teda && has_inflight && apply >= inflight_from &&
        apply < inflight_until;
    result.trajectory.push_back(std::move(r.action));
    result.trace.steps.push_back(std::move(step));
    prev_apply = apply;
  }

  result.trace.total_us = prev_apply + exec_us;
  result.metrics = finalize_metrics(cfg, tm, mode, result.trace, result.trajectory,
                                    scheduler.predictions_launched() +
                                        (mode == Mode::open_loop ? 0 : 1),
                                    scheduler.predictions_committed(), reference);
  return result;
}

ComparisonReport compare(const SchedulerConfig& cfg, const TimingModel& tm,
                         const PolicyHandle& policy, const ObservationFn& observe,
                         const ReferenceTrajectory& reference) {
  ComparisonReport report;
  report.teda = simulate(cfg, tm, Mode::teda, policy, observe, reference);
  report.per_step_te = simulate(cfg, tm, Mode::per_step_te, policy, observe, reference);
  report.open_loop = simulate(cfg, tm, Mode::open_loop, policy, observe, reference);
  report.speedup_vs_per_step_te =
      report.per_step_te.metrics.per_step_s / report.teda.metrics.per_step_s;
  report.gap_ratio_vs_open_loop =
      report.open_loop.metrics.max_gap_s / report.teda.metrics.max_gap_s;
  if (report.teda.metrics.jitter > 0.0) {
    report.jitter_ratio_vs_open_loop =
        report.open_loop.metrics.jitter / report.teda.metrics.jitter;
  }
  return report;
}

}  // namespace teda
