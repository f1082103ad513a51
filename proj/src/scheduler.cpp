#include "teda/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace teda {

EnsembleBuffer::EnsembleBuffer(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("EnsembleBuffer: rows and cols must be >= 1");
  }
}

void EnsembleBuffer::write_row(int row, PredictionRecord record) {
  if (row != rows_used()) {
    throw std::logic_error("EnsembleBuffer: rows must be committed in order, once");
  }
  if (row >= rows_) {
    throw std::logic_error("EnsembleBuffer: row " + std::to_string(row) +
                           " outside the allocated " + std::to_string(rows_) +
                           " rows");
  }
  const int last_col = record.start_step + static_cast<int>(record.actions.size()) - 1;
  if (record.start_step < 0 || last_col >= cols_) {
    throw std::logic_error("EnsembleBuffer: span [" +
                           std::to_string(record.start_step) + ", " +
                           std::to_string(last_col) + "] outside " +
                           std::to_string(cols_) + " columns");
  }
  record.tp_index = row;
  committed_.push_back(std::move(record));
}

std::vector<const ActionVector*> EnsembleBuffer::gather(int col) const {
  std::vector<const ActionVector*> out;
  for (const PredictionRecord& rec : committed_) {
    const ActionVector* a = cell(rec.tp_index, col);
    if (a != nullptr) {
      out.push_back(a);
    }
  }
  return out;
}

const ActionVector* EnsembleBuffer::cell(int row, int col) const {
  if (row < 0 || row >= rows_used() || col < 0 || col >= cols_) {
    return nullptr;
  }
  const PredictionRecord& rec = committed_[static_cast<std::size_t>(row)];
  const int offset = col - rec.start_step;
  if (offset < 0 || offset >= static_cast<int>(rec.actions.size())) {
    return nullptr;
  }
  return &rec.actions[static_cast<std::size_t>(offset)];
}

void SyncChunkSource::launch(int start_step) {
  ready_ = Chunk{start_step, policy_.predict(observe_(start_step), start_step)};
}

Chunk SyncChunkSource::collect() {
  if (!ready_.has_value()) {
    throw std::logic_error("SyncChunkSource: collect() without a launch");
  }
  Chunk out = std::move(*ready_);
  ready_.reset();
  return out;
}

EnsembleScheduler::EnsembleScheduler(const SchedulerParams& params,
                                     std::optional<Chunk> initial)
    : params_(params), buffer_(params.buffer_rows, params.buffer_cols) {
  if (params_.chunk_size < 1 || params_.episode_length < 1 ||
      params_.action_dim < 1) {
    throw std::invalid_argument("EnsembleScheduler: invalid parameters");
  }
  if (params_.launch_period < 1 || params_.commit_delay < 0) {
    throw std::invalid_argument("EnsembleScheduler: invalid launch schedule");
  }
  if (params_.commit_delay > 0 && params_.commit_delay != params_.launch_period) {
    // A launched prediction completes exactly one launch period later, so a
    // nonzero delay must match the period for commits to land on events.
    throw std::invalid_argument(
        "EnsembleScheduler: commit_delay must equal launch_period (or be 0)");
  }
  if (params_.commit_delay > 0) {
    if (!initial.has_value()) {
      throw std::invalid_argument(
          "EnsembleScheduler: a pipelined schedule needs an initial chunk");
    }
    if (initial->start_step != 0) {
      throw std::invalid_argument(
          "EnsembleScheduler: the initial chunk must target steps 0..k-1");
    }
    validate_chunk(*initial, 0);
    staged_initial_ = std::move(initial);
  } else if (initial.has_value()) {
    throw std::invalid_argument(
        "EnsembleScheduler: open-loop scheduling takes no initial chunk");
  }
}

void EnsembleScheduler::validate_chunk(const Chunk& chunk, int expected_start) const {
  if (chunk.start_step != expected_start) {
    throw std::logic_error("chunk start step " + std::to_string(chunk.start_step) +
                           " does not match its launch step " +
                           std::to_string(expected_start));
  }
  if (static_cast<int>(chunk.actions.size()) != params_.chunk_size) {
    throw std::invalid_argument(
        "policy returned " + std::to_string(chunk.actions.size()) +
        " actions, expected chunk_size=" + std::to_string(params_.chunk_size));
  }
  for (const ActionVector& a : chunk.actions) {
    if (static_cast<int>(a.size()) != params_.action_dim) {
      throw std::invalid_argument("policy action dimension mismatch");
    }
    for (double v : a) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("policy produced a non-finite action entry");
      }
    }
  }
}

void EnsembleScheduler::commit(Chunk chunk, bool is_initial, int at_step) {
  const int start_step = chunk.start_step;
  PredictionRecord record;
  record.start_step = start_step;
  record.completion_step = at_step;
  record.actions = std::move(chunk.actions);
  buffer_.write_row(next_row_, std::move(record));
  // Lagging targets (start_step .. at_step-1) were overtaken by execution
  // while the prediction ran; the pre-episode chunk lags nothing.
  ledger_.add(is_initial ? 0 : at_step - start_step);
  ++next_row_;
}

std::optional<int> EnsembleScheduler::pending_completion_step() const {
  if (staged_initial_.has_value()) {
    return 1;
  }
  if (inflight_start_.has_value()) {
    return *inflight_start_ + params_.commit_delay;
  }
  return std::nullopt;
}

StepResult EnsembleScheduler::step(ChunkSource& source) {
  if (done()) {
    throw std::logic_error("step() called past episode end");
  }
  const int t = ++step_;

  StepResult result;
  const bool launch_event = t % params_.launch_period == 1 % params_.launch_period;
  if (launch_event) {
    if (params_.commit_delay > 0) {
      // The previous launch completed during the last commit_delay steps;
      // fold it in, then start the next prediction from o_t.
      Chunk completed;
      bool was_initial = false;
      if (staged_initial_.has_value()) {
        completed = std::move(*staged_initial_);
        staged_initial_.reset();
        was_initial = true;
      } else if (inflight_start_.has_value()) {
        completed = source.collect();
        validate_chunk(completed, *inflight_start_);
      } else {
        throw std::logic_error("no completed prediction at launch step " +
                               std::to_string(t));
      }
      result.committed_row = next_row_;
      commit(std::move(completed), was_initial, t);

      source.launch(t);
      inflight_start_ = t;
      ++launched_;
      result.launched = true;
    } else {
      // Serial chunking: predict, wait, then execute the chunk as one unit.
      source.launch(t);
      Chunk chunk = source.collect();
      validate_chunk(chunk, t);
      result.committed_row = next_row_;
      commit(std::move(chunk), false, t);
      ++launched_;
      result.launched = true;
    }
  }

  const auto ensemble = buffer_.gather(t);
  if (ensemble.empty()) {
    throw std::logic_error(
        "empty ensemble at column " + std::to_string(t) +
        ": no committed prediction covers this step (chunk_size must be >= "
        "2x the commit delay for gap-free coverage)");
  }
  std::vector<ActionVector> actions;
  actions.reserve(ensemble.size());
  for (const ActionVector* a : ensemble) {
    actions.push_back(*a);
  }
  const auto weights =
      ensemble_weights(static_cast<int>(actions.size()), params_.weight_decay);
  result.action = weighted_apply(actions, weights);
  result.ensemble_size = static_cast<int>(actions.size());
  result.drops_total = ledger_.total;
  ensemble_sizes_.push_back(result.ensemble_size);
  return result;
}

SchedulerParams make_scheduler_params(const SchedulerConfig& cfg, int launch_period,
                                      int commit_delay) {
  cfg.validate();
  SchedulerParams p;
  p.chunk_size = cfg.chunk_size;
  p.episode_length = cfg.episode_length;
  p.action_dim = cfg.action_dim;
  p.weight_decay = cfg.weight_decay;
  p.launch_period = launch_period;
  p.commit_delay = commit_delay;
  p.buffer_rows = 2 + (cfg.episode_length - 1) / launch_period;
  p.buffer_cols = 1 + (p.buffer_rows - 2) * launch_period + cfg.chunk_size;
  return p;
}

EnsembleScheduler init_episode(const SchedulerConfig& cfg, const DerivedSchedule& sched,
                               Chunk initial_prediction) {
  SchedulerParams p =
      make_scheduler_params(cfg, sched.dropped_per_chunk, sched.dropped_per_chunk);
  // Geometry comes from the derived schedule; the shared formula must agree.
  if (p.buffer_rows != sched.max_predictions || p.buffer_cols != sched.buffer_cols) {
    throw std::logic_error("derived schedule does not match this configuration");
  }
  return EnsembleScheduler(p, std::move(initial_prediction));
}

int first_uncovered_column(int chunk_size, int episode_length, int launch_period,
                           int commit_delay, bool has_initial) {
  std::vector<char> covered(static_cast<std::size_t>(episode_length) + 1, 0);
  auto mark = [&](int from, int to) {
    for (int c = std::max(1, from); c <= std::min(episode_length, to); ++c) {
      covered[static_cast<std::size_t>(c)] = 1;
    }
  };
  if (has_initial) {
    mark(1, chunk_size - 1);  // initial chunk targets 0..k-1
  }
  for (int s = 1; s <= episode_length; s += launch_period) {
    const int usable_from = s + commit_delay;
    if (commit_delay > 0 && usable_from > episode_length) {
      break;  // completes after the episode ends, never committed
    }
    mark(usable_from, s + chunk_size - 1);
  }
  for (int c = 1; c <= episode_length; ++c) {
    if (!covered[static_cast<std::size_t>(c)]) {
      return c;
    }
  }
  return 0;
}

void ensure_pipelined_coverage(const SchedulerConfig& cfg, int launch_period) {
  const int gap = first_uncovered_column(cfg.chunk_size, cfg.episode_length,
                                         launch_period, launch_period,
                                         /*has_initial=*/true);
  if (gap != 0) {
    throw InfeasibleScheduleError(
        "schedule infeasible: step " + std::to_string(gap) +
        " is covered by no prediction (chunk size k=" +
        std::to_string(cfg.chunk_size) + " cannot bridge D=" +
        std::to_string(launch_period) + " dropped actions; needs k >= 2*D)");
  }
}

EpisodeResult run_episode(const SchedulerConfig& cfg, const DerivedSchedule& sched,
                          const PolicyHandle& policy, const ObservationFn& observe) {
  ensure_pipelined_coverage(cfg, sched.dropped_per_chunk);

  Chunk initial{0, policy.predict(observe(0), 0)};
  EnsembleScheduler scheduler = init_episode(cfg, sched, std::move(initial));
  SyncChunkSource source(policy, observe);

  EpisodeResult out;
  out.trajectory.reserve(static_cast<std::size_t>(cfg.episode_length));
  while (!scheduler.done()) {
    StepResult r = scheduler.step(source);
    out.trajectory.push_back(std::move(r.action));
  }
  out.drops = scheduler.ledger();
  out.ensemble_sizes = scheduler.ensemble_sizes();
  out.predictions_launched = scheduler.predictions_launched() + 1;  // + initial
  out.predictions_committed = scheduler.predictions_committed();
  return out;
}

}  // namespace teda
