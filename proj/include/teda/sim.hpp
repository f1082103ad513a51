#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "teda/core_types.hpp"
#include "teda/policy.hpp"
#include "teda/scheduler.hpp"

namespace teda {

struct SimStep {
  int step = 0;
  std::int64_t wall_us = 0;  // when the action is handed to the executor
  ActionVector action;
  int ensemble_size = 0;
  long long drops_cum = 0;
  std::int64_t stall_us = 0;
  bool prediction_inflight = false;
};

struct SimTrace {
  std::vector<SimStep> steps;
  std::int64_t startup_us = 0;
  std::int64_t total_us = 0;  // end of the last step's execution
  int deadline_misses = 0;    // real-time runs only
};

/// Per-run scalar summary. Times are seconds; wall times stay exact because
/// the simulator accumulates integer microseconds underneath.
struct MetricsReport {
  double per_step_s = 0.0;   // steady-state cost of one step
  double total_wall_s = 0.0;
  double startup_s = 0.0;
  double max_gap_s = 0.0;    // largest spacing between consecutive actions
  long long dropped_total = 0;
  double ensemble_size_mean = 0.0;
  int ensemble_size_max = 0;
  double jitter = 0.0;       // max |a[t+1] - 2a[t] + a[t-1]|, any dimension
  std::optional<double> trajectory_rmse;  // vs a reference, when provided
  long long predictions_launched = 0;
  long long predictions_committed = 0;
};

struct SimResult {
  Mode mode = Mode::teda;
  SimTrace trace;
  MetricsReport metrics;
  std::vector<ActionVector> trajectory;
  std::optional<DerivedSchedule> schedule;  // present for the pipelined mode
};

using ReferenceTrajectory = std::optional<std::vector<ActionVector>>;

/// Virtual-time run: the scheduler's launch/complete/apply events are laid
/// out on an integer-microsecond clock, with the mode's timing structure
///   teda        - steps every t3+t4, prediction overlaps execution,
///                 one-time startup of t1+t2
///   per_step_te - serial t1+t2+t3+t4 per step
///   open_loop   - t3+t4 per step plus a t1+t2 stall at each chunk boundary
/// Throws InfeasibleScheduleError when the pipelined mode cannot cover the
/// episode.
SimResult simulate(const SchedulerConfig& cfg, const TimingModel& tm, Mode mode,
                   const PolicyHandle& policy, const ObservationFn& observe,
                   const ReferenceTrajectory& reference = std::nullopt);

struct ComparisonReport {
  SimResult teda;
  SimResult per_step_te;
  SimResult open_loop;
  double speedup_vs_per_step_te = 0.0;   // per-step time ratio
  double gap_ratio_vs_open_loop = 0.0;   // max-gap ratio
  std::optional<double> jitter_ratio_vs_open_loop;  // absent if teda jitter is 0
};

/// Runs all three modes on identical inputs.
ComparisonReport compare(const SchedulerConfig& cfg, const TimingModel& tm,
                         const PolicyHandle& policy, const ObservationFn& observe,
                         const ReferenceTrajectory& reference = std::nullopt);

/// Wall-clock run: an executor context ticks at the execution period while
/// a predictor context services launches, sleeping to honor t1+t2 on top of
/// any real compute time. Trace timestamps are measured; the applied
/// trajectory is identical to the virtual-time trajectory. A predictor
/// overrun at a commit step is recorded as a deadline miss and waited out
/// rather than corrupting the ensemble.
SimResult run_realtime(const SchedulerConfig& cfg, const TimingModel& tm, Mode mode,
                       const PolicyHandle& policy, const ObservationFn& observe,
                       const ReferenceTrajectory& reference = std::nullopt);

}  // namespace teda
