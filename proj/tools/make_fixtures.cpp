// Regenerates the binary fixtures under fixtures/ from fixed seeds. The
// outputs are committed; rerunning must reproduce them byte for byte.
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "teda/container.hpp"
#include "teda/policy.hpp"
#include "teda/prng.hpp"
#include "teda/tensor.hpp"

namespace {

constexpr std::uint64_t kWeightSeed = 0x7edaf1c5u;
constexpr std::uint64_t kInputSeed = 0x7edaf1c6u;
constexpr std::uint64_t kNoiseSeed = 0x7edaf1c7u;
constexpr int kObsDim = 8;
constexpr int kHiddenDim = 24;
constexpr int kActionDim = 7;
constexpr int kChunkSize = 25;
constexpr int kTrials = 25;
constexpr double kNoiseMagnitude = 0.1;

teda::Tensor random_tensor(teda::SplitMix64& gen, std::uint32_t rows,
                           std::uint32_t cols, double limit) {
  teda::Tensor t;
  t.shape = {1, 1, rows, cols};
  t.data.resize(static_cast<std::size_t>(rows) * cols);
  for (float& v : t.data) {
    v = static_cast<float>(gen.uniform(-limit, limit));
  }
  return t;
}

teda::TinyMlp build_reference_net() {
  teda::SplitMix64 gen(kWeightSeed);
  teda::TinyMlp net;
  net.activation = teda::Activation::tanh;
  const int out_dim = kActionDim * kChunkSize;

  auto add_layer = [&](int in, int out) {
    const double limit = std::sqrt(6.0 / (in + out));
    teda::TinyMlp::Layer layer;
    layer.weight = random_tensor(gen, static_cast<std::uint32_t>(out),
                                 static_cast<std::uint32_t>(in), limit);
    layer.bias = random_tensor(gen, 1, static_cast<std::uint32_t>(out), limit / 4.0);
    layer.bias.shape = {1, 1, 1, static_cast<std::uint32_t>(out)};
    net.layers.push_back(std::move(layer));
  };
  add_layer(kObsDim, kHiddenDim);
  add_layer(kHiddenDim, out_dim);
  return net;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regenerate committed binary fixtures"};
  std::string out_dir = "fixtures";
  app.add_option("--out-dir", out_dir, "directory to write into");
  CLI11_PARSE(app, argc, argv);

  const teda::TinyMlp net = build_reference_net();
  teda::save_tiny_mlp(out_dir + "/tinymlp_f32.tdac", net);

  // int16 twin: every tensor quantized with its own per-tensor scale.
  {
    std::vector<teda::NamedTensor> tensors;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      const std::string prefix = "layer" + std::to_string(i) + ".";
      tensors.push_back({prefix + "weight", teda::quantize(net.layers[i].weight)});
      tensors.push_back({prefix + "bias", teda::quantize(net.layers[i].bias)});
    }
    teda::write_model_file(out_dir + "/tinymlp_int16.tdac", tensors);
  }

  // Evaluation inputs plus ground truth: the float net's outputs perturbed
  // by frozen noise, standing in for recorded target actions.
  {
    teda::SplitMix64 in_gen(kInputSeed);
    teda::SplitMix64 noise_gen(kNoiseSeed);
    std::vector<teda::NamedTensor> inputs;
    std::vector<teda::NamedTensor> truths;
    char name[16];
    for (int trial = 0; trial < kTrials; ++trial) {
      teda::Tensor input;
      input.shape = {1, 1, 1, kObsDim};
      input.data.resize(kObsDim);
      for (float& v : input.data) {
        v = static_cast<float>(in_gen.uniform(-1.0, 1.0));
      }
      teda::Tensor truth = teda::mlp_forward(net, input);
      for (float& v : truth.data) {
        v += static_cast<float>(noise_gen.uniform(-kNoiseMagnitude, kNoiseMagnitude));
      }
      std::snprintf(name, sizeof(name), "trial%02d", trial);
      inputs.push_back({name, std::move(input)});
      truths.push_back({name, std::move(truth)});
    }
    teda::write_model_file(out_dir + "/eval_inputs.tdac", inputs);
    teda::write_model_file(out_dir + "/eval_gt.tdac", truths);
  }

  std::printf("fixtures written to %s/\n", out_dir.c_str());
  return 0;
}
