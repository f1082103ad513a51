#include "teda/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace teda {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    if (known.find(item.key()) == known.end()) {
      throw std::invalid_argument("config: unknown key '" + item.key() + "' in " +
                                  where);
    }
  }
}

double require_number(const json& obj, const std::string& key,
                      const std::string& where) {
  if (!obj.contains(key)) {
    throw std::invalid_argument("config: missing required key '" + key + "' in " +
                                where);
  }
  if (!obj[key].is_number()) {
    throw std::invalid_argument("config: '" + key + "' must be a number");
  }
  return obj[key].get<double>();
}

int require_int(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_number_integer()) {
    throw std::invalid_argument("config: '" + key + "' must be an integer in " +
                                where);
  }
  return obj[key].get<int>();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) {
    throw std::invalid_argument("config: top level must be a JSON object");
  }
  reject_unknown_keys(root,
                      {"chunk_size", "episode_length", "weight_decay", "action_dim",
                       "t1", "t2", "t3", "t4", "mode", "seed", "policy"},
                      "the top-level object");

  RunConfig cfg;
  cfg.scheduler.chunk_size = require_int(root, "chunk_size", "the top-level object");
  cfg.scheduler.episode_length =
      require_int(root, "episode_length", "the top-level object");
  cfg.scheduler.action_dim = require_int(root, "action_dim", "the top-level object");
  if (root.contains("weight_decay")) {
    cfg.scheduler.weight_decay =
        require_number(root, "weight_decay", "the top-level object");
  }
  // Latencies are never defaulted; a run must state its timing explicitly.
  cfg.timing.observation_s = require_number(root, "t1", "the top-level object");
  cfg.timing.prediction_s = require_number(root, "t2", "the top-level object");
  cfg.timing.communication_s = require_number(root, "t3", "the top-level object");
  cfg.timing.execution_s = require_number(root, "t4", "the top-level object");
  cfg.scheduler.validate();
  cfg.timing.validate();

  if (root.contains("mode")) {
    if (!root["mode"].is_string()) {
      throw std::invalid_argument("config: 'mode' must be a string");
    }
    cfg.mode = mode_from_string(root["mode"].get<std::string>());
  }
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned() && !root["seed"].is_number_integer()) {
      throw std::invalid_argument("config: 'seed' must be an integer");
    }
    cfg.seed = root["seed"].get<std::uint64_t>();
  }

  if (!root.contains("policy")) {
    throw std::invalid_argument("config: missing required key 'policy'");
  }
  const json& policy = root["policy"];
  if (!policy.is_object() || !policy.contains("type") ||
      !policy["type"].is_string()) {
    throw std::invalid_argument("config: 'policy' must be an object with a 'type'");
  }
  const std::string type = policy["type"].get<std::string>();
  if (type == "scripted") {
    reject_unknown_keys(policy,
                        {"type", "waveform", "amplitude", "period_steps", "value",
                         "staleness"},
                        "the policy object");
    RunConfig::ScriptedSpec spec;
    if (policy.contains("waveform")) {
      spec.waveform = policy["waveform"].get<std::string>();
      if (spec.waveform != "sine" && spec.waveform != "constant") {
        throw std::invalid_argument("config: waveform must be 'sine' or 'constant'");
      }
    }
    if (policy.contains("amplitude")) {
      spec.amplitude = require_number(policy, "amplitude", "the policy object");
    }
    if (policy.contains("period_steps")) {
      spec.period_steps = require_number(policy, "period_steps", "the policy object");
      if (!(spec.period_steps > 0.0)) {
        throw std::invalid_argument("config: period_steps must be > 0");
      }
    }
    if (policy.contains("value")) {
      spec.constant_value = require_number(policy, "value", "the policy object");
    }
    if (policy.contains("staleness")) {
      spec.staleness = require_number(policy, "staleness", "the policy object");
    }
    cfg.scripted = spec;
  } else if (type == "mlp") {
    reject_unknown_keys(policy, {"type", "model", "activation", "obs_dim", "quantized"},
                        "the policy object");
    RunConfig::MlpSpec spec;
    if (!policy.contains("model") || !policy["model"].is_string()) {
      throw std::invalid_argument("config: mlp policy needs a 'model' path");
    }
    spec.model_path = policy["model"].get<std::string>();
    if (policy.contains("activation")) {
      spec.activation = policy["activation"].get<std::string>();
      activation_from_string(spec.activation);  // validate
    }
    spec.obs_dim = require_int(policy, "obs_dim", "the policy object");
    if (spec.obs_dim < 1) {
      throw std::invalid_argument("config: obs_dim must be >= 1");
    }
    if (policy.contains("quantized")) {
      if (!policy["quantized"].is_boolean()) {
        throw std::invalid_argument("config: 'quantized' must be a boolean");
      }
      spec.quantized = policy["quantized"].get<bool>();
    }
    cfg.mlp = spec;
  } else {
    throw std::invalid_argument("config: policy type must be 'scripted' or 'mlp'");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open '" + path + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

RealizedPolicy realize_policy(const RunConfig& config) {
  RealizedPolicy out;
  if (config.scripted.has_value()) {
    const auto& spec = *config.scripted;
    ScriptedPolicy scripted;
    if (spec.waveform == "sine") {
      scripted.target = sine_trajectory(config.scheduler.action_dim, spec.amplitude,
                                        spec.period_steps);
    } else {
      scripted.target = constant_trajectory(ActionVector(
          static_cast<std::size_t>(config.scheduler.action_dim), spec.constant_value));
    }
    if (spec.staleness != 0.0) {
      scripted.staleness = linear_staleness(spec.staleness);
    }
    auto target = scripted.target;  // for the RMSE reference below
    out.policy = make_scripted_policy(std::move(scripted), config.scheduler.chunk_size);
    out.policy.declared_observation_s = config.timing.observation_s;
    out.policy.declared_prediction_s = config.timing.prediction_s;
    out.observe = empty_observations();
    std::vector<ActionVector> reference;
    reference.reserve(static_cast<std::size_t>(config.scheduler.episode_length));
    for (int t = 1; t <= config.scheduler.episode_length; ++t) {
      reference.push_back(target(t));
    }
    out.reference = std::move(reference);
  } else if (config.mlp.has_value()) {
    const auto& spec = *config.mlp;
    TinyMlp net = load_tiny_mlp(spec.model_path,
                                activation_from_string(spec.activation));
    if (net.input_dim() != spec.obs_dim) {
      throw std::invalid_argument("config: obs_dim " + std::to_string(spec.obs_dim) +
                                  " does not match the model input dim " +
                                  std::to_string(net.input_dim()));
    }
    out.policy = make_mlp_policy(std::move(net), config.scheduler.action_dim,
                                 config.scheduler.chunk_size);
    out.policy.declared_observation_s = config.timing.observation_s;
    out.policy.declared_prediction_s = config.timing.prediction_s;
    out.observe = synthetic_observations(config.seed, spec.obs_dim);
  } else {
    throw std::invalid_argument("config: no policy specified");
  }
  return out;
}

}  // namespace teda
