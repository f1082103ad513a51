#pragma once

#include "teda/scheduler.hpp"

namespace teda {

/// Serial observe -> predict -> apply at every step, with the full chunk
/// history ensembled per column. Shares the commit machinery with the
/// pipelined scheduler at period 1, so a pipelined run whose derived drop
/// count is 1 reproduces this trajectory exactly.
EpisodeResult run_per_step_te(const SchedulerConfig& cfg, const PolicyHandle& policy,
                              const ObservationFn& observe);

/// Predict once every k steps and execute the chunk as one unit: no
/// overlap, no ensembling, a serial prediction wait at every boundary.
EpisodeResult run_open_loop(const SchedulerConfig& cfg, const PolicyHandle& policy,
                            const ObservationFn& observe);

}  // namespace teda
