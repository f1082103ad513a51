#include "teda/policy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "teda/container.hpp"
#include "teda/prng.hpp"

namespace teda {

std::vector<ActionVector> scripted_predict(const ScriptedPolicy& p, int start_step,
                                           int chunk_size) {
  if (chunk_size < 1) {
    throw std::invalid_argument("scripted_predict: chunk_size must be >= 1");
  }
  std::vector<ActionVector> chunk;
  chunk.reserve(static_cast<std::size_t>(chunk_size));
  for (int j = 0; j < chunk_size; ++j) {
    ActionVector a = p.target(start_step + j);
    if (p.staleness) {
      const double eps = p.staleness(j);
      for (double& v : a) {
        v += eps;
      }
    }
    chunk.push_back(std::move(a));
  }
  return chunk;
}

PolicyHandle make_scripted_policy(ScriptedPolicy p, int chunk_size) {
  PolicyHandle handle;
  handle.predict = [policy = std::move(p), chunk_size](const Observation&,
                                                       int start_step) {
    return scripted_predict(policy, start_step, chunk_size);
  };
  return handle;
}

std::function<ActionVector(int)> sine_trajectory(int action_dim, double amplitude,
                                                 double period_steps) {
  if (action_dim < 1 || !(period_steps > 0.0)) {
    throw std::invalid_argument("sine_trajectory: bad action_dim or period");
  }
  return [action_dim, amplitude, period_steps](int step) {
    ActionVector a(static_cast<std::size_t>(action_dim));
    for (int d = 0; d < action_dim; ++d) {
      const double phase = std::numbers::pi * d / action_dim;
      a[static_cast<std::size_t>(d)] =
          amplitude * std::sin(2.0 * std::numbers::pi * step / period_steps + phase);
    }
    return a;
  };
}

std::function<ActionVector(int)> constant_trajectory(ActionVector value) {
  if (value.empty()) {
    throw std::invalid_argument("constant_trajectory: empty action");
  }
  return [value = std::move(value)](int) { return value; };
}

std::function<ActionVector(int)> table_trajectory(std::vector<ActionVector> table) {
  return [table = std::move(table)](int step) {
    if (step < 0 || static_cast<std::size_t>(step) >= table.size()) {
      throw std::out_of_range("table_trajectory: step " + std::to_string(step) +
                              " outside [0, " + std::to_string(table.size()) + ")");
    }
    return table[static_cast<std::size_t>(step)];
  };
}

std::function<double(int)> linear_staleness(double rate) {
  return [rate](int lookahead) { return rate * lookahead; };
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
  return a == Activation::relu ? "relu" : "tanh";
}

int TinyMlp::input_dim() const {
  if (layers.empty()) return 0;
  return static_cast<int>(layers.front().weight.shape[3]);
}

int TinyMlp::output_dim() const {
  if (layers.empty()) return 0;
  return static_cast<int>(layers.back().weight.shape[2]);
}

void TinyMlp::validate() const {
  if (layers.empty()) {
    throw std::invalid_argument("TinyMlp: no layers");
  }
  std::uint32_t prev_out = layers.front().weight.shape[3];
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& w = layers[i].weight;
    const auto& b = layers[i].bias;
    w.validate();
    b.validate();
    if (w.shape[0] != 1 || w.shape[1] != 1) {
      throw std::invalid_argument("TinyMlp: weight tensors must be (1,1,out,in)");
    }
    if (b.shape[0] != 1 || b.shape[1] != 1 || b.shape[2] != 1 ||
        b.shape[3] != w.shape[2]) {
      throw std::invalid_argument("TinyMlp: bias shape must be (1,1,1,out)");
    }
    if (w.shape[3] != prev_out) {
      throw std::invalid_argument("TinyMlp: layer " + std::to_string(i) +
                                  " input dim mismatch");
    }
    prev_out = w.shape[2];
  }
}

Tensor mlp_forward(const TinyMlp& net, const Tensor& input) {
  net.validate();
  if (input.shape[0] != 1 || input.shape[1] != 1 || input.shape[2] != 1 ||
      input.shape[3] != net.layers.front().weight.shape[3]) {
    throw std::invalid_argument("mlp_forward: input shape mismatch");
  }

  std::vector<double> x(input.data.begin(), input.data.end());
  for (const auto& layer : net.layers) {
    const std::uint32_t out_dim = layer.weight.shape[2];
    const std::uint32_t in_dim = layer.weight.shape[3];
    std::vector<double> y(out_dim);
    for (std::uint32_t o = 0; o < out_dim; ++o) {
      double acc = static_cast<double>(layer.bias.data[o]);
      const float* row = layer.weight.data.data() + static_cast<std::size_t>(o) * in_dim;
      for (std::uint32_t i = 0; i < in_dim; ++i) {
        acc += static_cast<double>(row[i]) * x[i];
      }
      y[o] = net.activation == Activation::relu ? (acc > 0.0 ? acc : 0.0)
                                                : std::tanh(acc);
    }
    x = std::move(y);
  }

  Tensor out;
  out.shape = {1, 1, 1, static_cast<std::uint32_t>(x.size())};
  out.data.assign(x.begin(), x.end());
  return out;
}

namespace {

Tensor to_float_tensor(const AnyTensor& any) {
  if (is_quantized(any)) {
    return dequantize(std::get<QuantizedTensor>(any));
  }
  return std::get<Tensor>(any);
}

}  // namespace

TinyMlp load_tiny_mlp(const std::string& path, Activation activation) {
  const auto tensors = read_model_file(path);
  TinyMlp net;
  net.activation = activation;
  // Expect pairs named layer<i>.weight / layer<i>.bias, in order.
  for (std::size_t i = 0; i * 2 < tensors.size(); ++i) {
    const std::string prefix = "layer" + std::to_string(i) + ".";
    const NamedTensor& w = tensors[i * 2];
    const NamedTensor& b = tensors[i * 2 + 1];
    if (w.name != prefix + "weight" || b.name != prefix + "bias") {
      throw ContainerFormatError("model file '" + path +
                                 "' is not a TinyMlp layout (got '" + w.name +
                                 "', '" + b.name + "')");
    }
    net.layers.push_back({to_float_tensor(w.tensor), to_float_tensor(b.tensor)});
  }
  net.validate();
  return net;
}

void save_tiny_mlp(const std::string& path, const TinyMlp& net) {
  net.validate();
  std::vector<NamedTensor> tensors;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const std::string prefix = "layer" + std::to_string(i) + ".";
    tensors.push_back({prefix + "weight", net.layers[i].weight});
    tensors.push_back({prefix + "bias", net.layers[i].bias});
  }
  write_model_file(path, tensors);
}

PolicyHandle make_mlp_policy(TinyMlp net, int action_dim, int chunk_size) {
  net.validate();
  if (net.output_dim() != action_dim * chunk_size) {
    throw std::invalid_argument(
        "make_mlp_policy: output dim " + std::to_string(net.output_dim()) +
        " != action_dim * chunk_size = " +
        std::to_string(action_dim * chunk_size));
  }
  PolicyHandle handle;
  handle.predict = [net = std::move(net), action_dim, chunk_size](
                       const Observation& obs, int) {
    const Tensor out = mlp_forward(net, obs);
    std::vector<ActionVector> chunk(static_cast<std::size_t>(chunk_size));
    for (int j = 0; j < chunk_size; ++j) {
      ActionVector a(static_cast<std::size_t>(action_dim));
      for (int d = 0; d < action_dim; ++d) {
        a[static_cast<std::size_t>(d)] =
            static_cast<double>(out.data[static_cast<std::size_t>(j * action_dim + d)]);
      }
      chunk[static_cast<std::size_t>(j)] = std::move(a);
    }
    return chunk;
  };
  return handle;
}

ObservationFn synthetic_observations(std::uint64_t seed, int obs_dim) {
  if (obs_dim < 1) {
    throw std::invalid_argument("synthetic_observations: obs_dim must be >= 1");
  }
  return [seed, obs_dim](int step) {
    SplitMix64 g(mix64(seed, static_cast<std::uint64_t>(step) + 1));
    Tensor obs;
    obs.shape = {1, 1, 1, static_cast<std::uint32_t>(obs_dim)};
    obs.data.resize(static_cast<std::size_t>(obs_dim));
    for (float& v : obs.data) {
      v = static_cast<float>(g.uniform(-1.0, 1.0));
    }
    return obs;
  };
}

ObservationFn empty_observations() {
  return [](int) {
    Tensor obs;
    obs.shape = {1, 1, 1, 0};
    return obs;
  };
}

}  // namespace teda
