#include "teda/core_types.hpp"

#include <cmath>
#include <limits>

namespace teda {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::teda: return "teda";
    case Mode::per_step_te: return "per_step_te";
    case Mode::open_loop: return "open_loop";
  }
  throw std::logic_error("unknown mode");
}

Mode mode_from_string(const std::string& name) {
  if (name == "teda") return Mode::teda;
  if (name == "per_step_te") return Mode::per_step_te;
  if (name == "open_loop") return Mode::open_loop;
  throw std::invalid_argument("unknown mode '" + name +
                              "' (expected teda, per_step_te or open_loop)");
}

void SchedulerConfig::validate() const {
  if (chunk_size < 1) {
    throw std::invalid_argument("chunk_size must be >= 1");
  }
  if (episode_length < 1) {
    throw std::invalid_argument("episode_length must be >= 1");
  }
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw std::invalid_argument("weight_decay must be finite and >= 0");
  }
  if (action_dim < 1) {
    throw std::invalid_argument("action_dim must be >= 1");
  }
}

namespace {

std::int64_t seconds_to_us(double s, const char* field) {
  if (!std::isfinite(s) || s < 0.0) {
    throw std::invalid_argument(std::string(field) +
                                " must be finite and >= 0 seconds");
  }
  return std::llround(s * 1e6);
}

}  // namespace

void TimingModel::validate() const {
  observation_us();
  prediction_us();
  communication_us();
  execution_us();
  if (executor_period_us() <= 0) {
    throw std::invalid_argument(
        "communication_s + execution_s must be > 0 (at microsecond resolution)");
  }
}

std::int64_t TimingModel::observation_us() const {
  return seconds_to_us(observation_s, "observation_s");
}
std::int64_t TimingModel::prediction_us() const {
  return seconds_to_us(prediction_s, "prediction_s");
}
std::int64_t TimingModel::communication_us() const {
  return seconds_to_us(communication_s, "communication_s");
}
std::int64_t TimingModel::execution_us() const {
  return seconds_to_us(execution_s, "execution_s");
}
std::int64_t TimingModel::predictor_period_us() const {
  return observation_us() + prediction_us();
}
std::int64_t TimingModel::executor_period_us() const {
  return communication_us() + execution_us();
}

DerivedSchedule derive_schedule(const SchedulerConfig& cfg, const TimingModel& tm) {
  cfg.validate();
  tm.validate();

  const std::int64_t pred_us = tm.predictor_period_us();
  const std::int64_t exec_us = tm.executor_period_us();

  // D = ceil(f_a / f_p) = ceil((t1+t2) / (t3+t4)), exact in integer microseconds.
  // An instant policy predicts within any execution period.
  const int dropped = pred_us == 0
                          ? 1
                          : static_cast<int>((pred_us + exec_us - 1) / exec_us);
  if (dropped > cfg.chunk_size) {
    throw InfeasibleScheduleError(
        "schedule infeasible: dropped actions per chunk D=" +
        std::to_string(dropped) + " exceeds chunk size k=" +
        std::to_string(cfg.chunk_size) +
        " (requires D <= k; prediction latency too large for this chunk)");
  }

  DerivedSchedule out;
  out.dropped_per_chunk = dropped;
  out.max_predictions = 2 + (cfg.episode_length - 1) / dropped;
  out.buffer_cols = 1 + (out.max_predictions - 2) * dropped + cfg.chunk_size;
  out.exec_hz = 1e6 / static_cast<double>(exec_us);
  out.pred_hz = pred_us == 0 ? std::numeric_limits<double>::infinity()
                             : 1e6 / static_cast<double>(pred_us);
  return out;
}

std::vector<double> ensemble_weights(int n, double decay) {
  if (n < 1) {
    throw std::invalid_argument("ensemble_weights: n must be >= 1");
  }
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<std::size_t>(i)] = std::exp(-decay * i);
  }
  return w;
}

ActionVector weighted_apply(std::span<const ActionVector> actions,
                            std::span<const double> weights) {
  if (actions.empty()) {
    throw std::invalid_argument("weighted_apply: empty action list");
  }
  if (actions.size() != weights.size()) {
    throw std::invalid_argument("weighted_apply: weights/actions length mismatch");
  }
  if (actions.size() == 1) {
    return actions[0];  // scale-free: a single action passes through untouched
  }
  const std::size_t dim = actions[0].size();
  ActionVector out(dim, 0.0);
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i].size() != dim) {
      throw std::invalid_argument("weighted_apply: inconsistent action dimensions");
    }
    const double w = weights[i];
    weight_sum += w;
    for (std::size_t d = 0; d < dim; ++d) {
      out[d] += w * actions[i][d];
    }
  }
  if (weight_sum == 0.0) {
    throw std::invalid_argument("weighted_apply: weights sum to zero");
  }
  for (double& v : out) {
    v /= weight_sum;
  }
  return out;
}

}  // namespace teda
