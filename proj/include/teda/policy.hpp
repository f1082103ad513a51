#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "teda/core_types.hpp"
#include "teda/tensor.hpp"

namespace teda {

/// Observations are NCHW tensors; schedulers treat them as opaque and only
/// hand them to the policy.
using Observation = Tensor;
using ObservationFn = std::function<Observation(int step)>;

/// Pluggable policy boundary: predict(observation, start_step) returns
/// chunk_size actions targeting steps start_step .. start_step+k-1.
/// predict must be deterministic in (observation, start_step).
struct PolicyHandle {
  std::function<std::vector<ActionVector>(const Observation&, int start_step)> predict;
  double declared_observation_s = 0.0;
  double declared_prediction_s = 0.0;
};

/// Deterministic stand-in for a trained policy: follows a target trajectory
/// g with a lookahead-dependent error, so ensembling has a visible effect.
/// predict(o, s)[j] = g(s + j) + staleness(j), elementwise.
struct ScriptedPolicy {
  std::function<ActionVector(int step)> target;      // g
  std::function<double(int lookahead)> staleness;    // epsilon
};

std::vector<ActionVector> scripted_predict(const ScriptedPolicy& p, int start_step,
                                           int chunk_size);

PolicyHandle make_scripted_policy(ScriptedPolicy p, int chunk_size);

/// g(t) = amplitude * sin(2*pi*t/period + phase_d), one phase per dimension
/// spread evenly over [0, pi).
std::function<ActionVector(int)> sine_trajectory(int action_dim, double amplitude,
                                                 double period_steps);
std::function<ActionVector(int)> constant_trajectory(ActionVector value);
/// Table-backed trajectory; steps outside [0, size) throw std::out_of_range.
std::function<ActionVector(int)> table_trajectory(std::vector<ActionVector> table);
/// epsilon(j) = rate * j; the default staleness model.
std::function<double(int)> linear_staleness(double rate);

enum class Activation { relu, tanh };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

/// Desk-scale feed-forward surrogate. Weights are (1,1,out,in) tensors and
/// biases (1,1,1,out); the activation follows every layer. Quantized model
/// files are dequantized on load and evaluated in floating point.
struct TinyMlp {
  struct Layer {
    Tensor weight;
    Tensor bias;
  };
  std::vector<Layer> layers;
  Activation activation = Activation::tanh;

  int input_dim() const;
  int output_dim() const;
  void validate() const;
};

/// (1,1,1,in) -> (1,1,1,out). Accumulates in double with a fixed order so
/// outputs are bit-stable across platforms.
Tensor mlp_forward(const TinyMlp& net, const Tensor& input);

TinyMlp load_tiny_mlp(const std::string& path, Activation activation);
void save_tiny_mlp(const std::string& path, const TinyMlp& net);

/// Wraps an MLP whose output dimension is action_dim * chunk_size; output
/// element j*action_dim + d becomes action j's component d.
PolicyHandle make_mlp_policy(TinyMlp net, int action_dim, int chunk_size);

/// Deterministic synthetic observation stream: values uniform in [-1, 1)
/// derived from (seed, step, index) via splitmix64.
ObservationFn synthetic_observations(std::uint64_t seed, int obs_dim);
/// For policies that ignore observations.
ObservationFn empty_observations();

}  // namespace teda
