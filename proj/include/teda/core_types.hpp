#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace teda {

/// Joint-space target emitted once per execution step. Dimension is fixed
/// for the whole episode; entries are finite.
using ActionVector = std::vector<double>;

enum class Mode { teda, per_step_te, open_loop };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

/// Thrown when a configuration cannot be scheduled (e.g. the chunk is too
/// short to cover the prediction latency). CLI maps this to exit code 2.
class InfeasibleScheduleError : public std::runtime_error {
 public:
  explicit InfeasibleScheduleError(const std::string& what)
      : std::runtime_error(what) {}
};

struct SchedulerConfig {
  int chunk_size = 0;       // actions per prediction (k)
  int episode_length = 0;   // execution steps per episode
  double weight_decay = 0.01;  // exponential ensemble decay, oldest-first
  int action_dim = 0;

  void validate() const;  // throws std::invalid_argument
};

/// Per-step latency decomposition, seconds: observation, prediction,
/// communication, execution.
struct TimingModel {
  double observation_s = 0.0;
  double prediction_s = 0.0;
  double communication_s = 0.0;
  double execution_s = 0.0;

  void validate() const;  // throws std::invalid_argument

  // Virtual time accumulates in integer microseconds.
  std::int64_t observation_us() const;
  std::int64_t prediction_us() const;
  std::int64_t communication_us() const;
  std::int64_t execution_us() const;
  std::int64_t predictor_period_us() const;  // observation + prediction
  std::int64_t executor_period_us() const;   // communication + execution
};

/// Quantities derived from (config, timing): how many actions each chunk
/// loses to prediction latency and how large the ensemble buffer must be.
struct DerivedSchedule {
  int dropped_per_chunk = 0;   // actions dropped per steady-state chunk;
                               // also the prediction-launch period in steps
  int max_predictions = 0;     // buffer rows
  int buffer_cols = 0;         // buffer columns (absolute target steps)
  double exec_hz = 0.0;
  double pred_hz = 0.0;        // +inf for an instant policy
};

/// Computes the launch period, buffer dimensions and frequencies for a
/// pipelined schedule. Throws InfeasibleScheduleError when the per-chunk
/// drop count exceeds the chunk size, std::invalid_argument on bad inputs.
DerivedSchedule derive_schedule(const SchedulerConfig& cfg, const TimingModel& tm);

/// Exponential ensemble weights w_i = exp(-decay * i); index 0 is the
/// oldest prediction available for a timestep.
std::vector<double> ensemble_weights(int n, double decay);

/// Elementwise (sum w_i * a_i) / (sum w_i). A single action is returned
/// unchanged, independent of its weight.
ActionVector weighted_apply(std::span<const ActionVector> actions,
                            std::span<const double> weights);

}  // namespace teda
