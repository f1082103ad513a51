#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "teda/core_types.hpp"
#include "teda/policy.hpp"
#include "teda/sim.hpp"

namespace teda {

/// Run description loaded from a JSON config file. Validation is strict:
/// every timing field must be present (no silent defaults) and unknown keys
/// are rejected.
struct RunConfig {
  SchedulerConfig scheduler;
  TimingModel timing;
  std::optional<Mode> mode;  // may instead come from the command line
  std::uint64_t seed = 0;

  struct ScriptedSpec {
    std::string waveform = "sine";  // sine | constant
    double amplitude = 1.0;
    double period_steps = 50.0;
    double constant_value = 0.0;
    double staleness = 0.0;
  };
  struct MlpSpec {
    std::string model_path;
    std::string activation = "tanh";
    int obs_dim = 0;
    bool quantized = false;  // informational; dtype is read from the file
  };

  std::optional<ScriptedSpec> scripted;
  std::optional<MlpSpec> mlp;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

/// Policy + observation stream + reference trajectory (for RMSE, scripted
/// policies only) realized from the config.
struct RealizedPolicy {
  PolicyHandle policy;
  ObservationFn observe;
  ReferenceTrajectory reference;
};

RealizedPolicy realize_policy(const RunConfig& config);

}  // namespace teda
