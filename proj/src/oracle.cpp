#include "teda/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace teda {

namespace {

struct MaterializedPrediction {
  int start_step;
  int usable_from;  // completion step: earlier targets are dropped
  std::vector<ActionVector> actions;
};

}  // namespace

std::vector<ActionVector> oracle_trajectory(const SchedulerConfig& cfg,
                                            int launch_period, int commit_delay,
                                            bool has_initial,
                                            const PolicyHandle& policy,
                                            const ObservationFn& observe) {
  cfg.validate();

  std::vector<MaterializedPrediction> predictions;
  if (has_initial) {
    predictions.push_back({0, 1, policy.predict(observe(0), 0)});
  }
  for (int s = 1; s <= cfg.episode_length; s += launch_period) {
    const int usable_from = s + commit_delay;
    if (commit_delay > 0 && usable_from > cfg.episode_length) {
      continue;  // still in flight when the episode ends
    }
    predictions.push_back({s, usable_from, policy.predict(observe(s), s)});
  }

  std::vector<ActionVector> trajectory;
  trajectory.reserve(static_cast<std::size_t>(cfg.episode_length));
  for (int t = 1; t <= cfg.episode_length; ++t) {
    ActionVector numerator(static_cast<std::size_t>(cfg.action_dim), 0.0);
    double denominator = 0.0;
    int i = 0;  // weight index, oldest prediction first
    for (const MaterializedPrediction& p : predictions) {
      const int offset = t - p.start_step;
      if (offset < 0 || offset >= static_cast<int>(p.actions.size()) ||
          t < p.usable_from) {
        continue;
      }
      const double w = std::exp(-cfg.weight_decay * i);
      ++i;
      for (int d = 0; d < cfg.action_dim; ++d) {
        numerator[static_cast<std::size_t>(d)] +=
            w * p.actions[static_cast<std::size_t>(offset)][static_cast<std::size_t>(d)];
      }
      denominator += w;
    }
    if (i == 0) {
      throw std::logic_error("oracle: no prediction covers step " + std::to_string(t));
    }
    for (double& v : numerator) {
      v /= denominator;
    }
    trajectory.push_back(std::move(numerator));
  }
  return trajectory;
}

}  // namespace teda
