#include "teda/baselines.hpp"

#include <utility>

namespace teda {

namespace {

EpisodeResult drive(EnsembleScheduler scheduler, const PolicyHandle& policy,
                    const ObservationFn& observe, int extra_launches) {
  SyncChunkSource source(policy, observe);
  EpisodeResult out;
  while (!scheduler.done()) {
    StepResult r = scheduler.step(source);
    out.trajectory.push_back(std::move(r.action));
  }
  out.drops = scheduler.ledger();
  out.ensemble_sizes = scheduler.ensemble_sizes();
  out.predictions_launched = scheduler.predictions_launched() + extra_launches;
  out.predictions_committed = scheduler.predictions_committed();
  return out;
}

}  // namespace

EpisodeResult run_per_step_te(const SchedulerConfig& cfg, const PolicyHandle& policy,
                              const ObservationFn& observe) {
  ensure_pipelined_coverage(cfg, 1);
  SchedulerParams params = make_scheduler_params(cfg, 1, 1);
  Chunk initial{0, policy.predict(observe(0), 0)};
  return drive(EnsembleScheduler(params, std::move(initial)), policy, observe,
               /*extra_launches=*/1);
}

EpisodeResult run_open_loop(const SchedulerConfig& cfg, const PolicyHandle& policy,
                            const ObservationFn& observe) {
  SchedulerParams params = make_scheduler_params(cfg, cfg.chunk_size, 0);
  return drive(EnsembleScheduler(params, std::nullopt), policy, observe,
               /*extra_launches=*/0);
}

}  // namespace teda
