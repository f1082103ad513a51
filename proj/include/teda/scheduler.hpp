#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "teda/core_types.hpp"
#include "teda/policy.hpp"

namespace teda {

/// A chunk as produced by one policy call: k actions targeting absolute
/// steps start_step .. start_step + k - 1.
struct Chunk {
  int start_step = 0;
  std::vector<ActionVector> actions;
};

/// One policy invocation after commit: the chunk plus the step at which it
/// entered the buffer. Targets earlier than completion_step are dropped.
struct PredictionRecord {
  int tp_index = 0;
  int start_step = 0;
  int completion_step = 0;
  std::vector<ActionVector> actions;
};

/// Grid of committed predictions, rows indexed by prediction counter and
/// columns by absolute target step. Each row is written exactly once as a
/// contiguous span; cells are never mutated afterwards.
class EnsembleBuffer {
 public:
  EnsembleBuffer(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int rows_used() const { return static_cast<int>(committed_.size()); }

  /// Commits a chunk into `row`. Throws std::logic_error on rewrite or
  /// out-of-range spans.
  void write_row(int row, PredictionRecord record);

  /// All committed actions targeting `col`, oldest prediction first.
  /// Rows are only committed at or after their completion step, and columns
  /// are read in step order, so dropped cells are unreachable here.
  std::vector<const ActionVector*> gather(int col) const;

  /// The committed action at (row, col), if that cell was written.
  const ActionVector* cell(int row, int col) const;

  const std::vector<PredictionRecord>& records() const { return committed_; }

 private:
  int rows_;
  int cols_;
  std::vector<PredictionRecord> committed_;  // ordered by tp_index
};

struct DropLedger {
  std::vector<int> per_prediction;  // commit order; initial chunk first
  long long total = 0;

  void add(int drops) {
    per_prediction.push_back(drops);
    total += drops;
  }
};

struct StepResult {
  ActionVector action;
  int ensemble_size = 0;
  long long drops_total = 0;
  bool launched = false;             // a prediction started this step
  std::optional<int> committed_row;  // row committed this step, if any
};

/// Where launched chunks are computed. The scheduler hands a start step to
/// launch() and receives the finished chunk from collect() at the commit
/// step; whether prediction happens inline or on another thread is the
/// source's business. collect() must return the chunk of the most recent
/// launch, fully assembled (commits are atomic at chunk granularity).
class ChunkSource {
 public:
  virtual ~ChunkSource() = default;
  virtual void launch(int start_step) = 0;
  virtual Chunk collect() = 0;
};

/// Inline prediction: launch() invokes the policy immediately.
class SyncChunkSource final : public ChunkSource {
 public:
  SyncChunkSource(const PolicyHandle& policy, const ObservationFn& observe)
      : policy_(policy), observe_(observe) {}

  void launch(int start_step) override;
  Chunk collect() override;

 private:
  const PolicyHandle& policy_;
  const ObservationFn& observe_;
  std::optional<Chunk> ready_;
};

/// Driving parameters for the commit machinery. The pipelined scheduler
/// uses launch_period == commit_delay == D; the per-step ensemble baseline
/// uses 1/1; open-loop chunking uses period k with delay 0 (a serial wait,
/// so the chunk is usable the same step and nothing is dropped).
struct SchedulerParams {
  int chunk_size = 0;
  int episode_length = 0;
  int action_dim = 0;
  double weight_decay = 0.0;
  int launch_period = 1;
  int commit_delay = 1;
  int buffer_rows = 0;
  int buffer_cols = 0;
};

/// Deterministic state machine over execution steps 1..T_a. At each launch
/// step it commits the prediction that just completed, counts its lagging
/// targets as dropped, starts the next prediction from the current
/// observation, and answers with the ensembled action for the current
/// column without waiting on anything still in flight.
class EnsembleScheduler {
 public:
  /// `initial` (required when commit_delay > 0) is the chunk predicted
  /// before the episode starts; it targets steps 0..k-1, commits at step 1
  /// and drops nothing.
  EnsembleScheduler(const SchedulerParams& params, std::optional<Chunk> initial);

  /// Advances to the next step and returns its ensembled action.
  /// Throws std::logic_error past episode end or on an empty column (the
  /// latter cannot happen for a coverage-feasible configuration).
  StepResult step(ChunkSource& source);

  int current_step() const { return step_; }
  bool done() const { return step_ >= params_.episode_length; }
  const SchedulerParams& params() const { return params_; }

  const EnsembleBuffer& buffer() const { return buffer_; }
  const DropLedger& ledger() const { return ledger_; }
  const std::vector<int>& ensemble_sizes() const { return ensemble_sizes_; }
  int predictions_launched() const { return launched_; }
  int predictions_committed() const { return buffer_.rows_used(); }
  /// Step at which the outstanding prediction commits, if one is in flight.
  std::optional<int> pending_completion_step() const;

 private:
  void commit(Chunk chunk, bool is_initial, int at_step);
  void validate_chunk(const Chunk& chunk, int expected_start) const;

  SchedulerParams params_;
  EnsembleBuffer buffer_;
  DropLedger ledger_;
  std::vector<int> ensemble_sizes_;
  std::optional<Chunk> staged_initial_;
  std::optional<int> inflight_start_;  // start step of the chunk in the source
  int step_ = 0;
  int next_row_ = 0;
  int launched_ = 0;
};

struct EpisodeResult {
  std::vector<ActionVector> trajectory;  // index t-1 holds the step-t action
  DropLedger drops;
  std::vector<int> ensemble_sizes;
  int predictions_launched = 0;
  int predictions_committed = 0;
};

/// Buffer geometry shared by all modes: rows = 2 + floor((T_a-1)/period),
/// cols = 1 + (rows-2)*period + k.
SchedulerParams make_scheduler_params(const SchedulerConfig& cfg, int launch_period,
                                      int commit_delay);

/// Allocates the pipelined scheduler for a derived schedule with its
/// pre-episode chunk staged for commit at step 1.
EnsembleScheduler init_episode(const SchedulerConfig& cfg, const DerivedSchedule& sched,
                               Chunk initial_prediction);

/// First column in [1, T_a] that no prediction can ever serve, or 0 when
/// every column is covered. Non-zero means an episode would fault: the
/// chunk is too short to bridge consecutive commits (k < 2*delay).
int first_uncovered_column(int chunk_size, int episode_length, int launch_period,
                           int commit_delay, bool has_initial);

/// Throws InfeasibleScheduleError when a pipelined run at this launch
/// period would hit an unserved step.
void ensure_pipelined_coverage(const SchedulerConfig& cfg, int launch_period);

/// Runs the full pipelined episode: predicts the initial chunk from the
/// step-0 observation, then steps through 1..T_a with inline prediction.
/// Throws InfeasibleScheduleError up front when coverage is impossible.
EpisodeResult run_episode(const SchedulerConfig& cfg, const DerivedSchedule& sched,
                          const PolicyHandle& policy, const ObservationFn& observe);

}  // namespace teda
