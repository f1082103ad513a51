#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "teda/baselines.hpp"
#include "teda/container.hpp"
#include "teda/core_types.hpp"
#include "teda/oracle.hpp"
#include "teda/run_config.hpp"
#include "teda/scheduler.hpp"
#include "teda/sim.hpp"
#include "teda/tensor.hpp"
#include "teda/trace_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitInfeasible = 2;

struct CommonRunArgs {
  std::string config_path;
  std::string mode_name;
  std::optional<std::uint64_t> seed;
};

teda::RunConfig load_config(const CommonRunArgs& args) {
  teda::RunConfig config = teda::load_run_config(args.config_path);
  if (args.seed.has_value()) {
    config.seed = *args.seed;
  }
  return config;
}

teda::Mode resolve_mode(const teda::RunConfig& config, const std::string& flag) {
  if (!flag.empty()) {
    return teda::mode_from_string(flag);
  }
  if (config.mode.has_value()) {
    return *config.mode;
  }
  throw std::invalid_argument("no mode given (use --mode or a 'mode' config key)");
}

int cmd_simulate(const CommonRunArgs& args, const std::string& trace_path,
                 const std::string& metrics_path, bool realtime) {
  const teda::RunConfig config = load_config(args);
  const teda::Mode mode = resolve_mode(config, args.mode_name);
  teda::RealizedPolicy rp = teda::realize_policy(config);

  const teda::SimResult result =
      realtime ? teda::run_realtime(config.scheduler, config.timing, mode, rp.policy,
                                    rp.observe, rp.reference)
               : teda::simulate(config.scheduler, config.timing, mode, rp.policy,
                                rp.observe, rp.reference);

  if (!trace_path.empty()) {
    teda::write_trace_csv_file(trace_path, result.trace);
  }
  if (!metrics_path.empty()) {
    teda::write_text_file(metrics_path, teda::metrics_json(result));
  }
  std::cout << "mode " << teda::to_string(mode) << ": per_step_s="
            << result.metrics.per_step_s << " total_wall_s="
            << result.metrics.total_wall_s << " drops="
            << result.metrics.dropped_total << "\n";
  return kExitOk;
}

int cmd_compare(const CommonRunArgs& args, const std::string& metrics_path) {
  const teda::RunConfig config = load_config(args);
  teda::RealizedPolicy rp = teda::realize_policy(config);
  const teda::ComparisonReport report = teda::compare(
      config.scheduler, config.timing, rp.policy, rp.observe, rp.reference);
  if (!metrics_path.empty()) {
    teda::write_text_file(metrics_path, teda::comparison_json(report));
  }
  std::cout << teda::comparison_table(report);
  return kExitOk;
}

int cmd_oracle(const CommonRunArgs& args, const std::string& out_path) {
  const teda::RunConfig config = load_config(args);
  const teda::Mode mode = resolve_mode(config, args.mode_name);
  teda::RealizedPolicy rp = teda::realize_policy(config);

  int period = 1;
  int delay = 1;
  bool has_initial = true;
  switch (mode) {
    case teda::Mode::teda: {
      const teda::DerivedSchedule sched =
          teda::derive_schedule(config.scheduler, config.timing);
      period = sched.dropped_per_chunk;
      delay = sched.dropped_per_chunk;
      teda::ensure_pipelined_coverage(config.scheduler, period);
      break;
    }
    case teda::Mode::per_step_te:
      break;
    case teda::Mode::open_loop:
      period = config.scheduler.chunk_size;
      delay = 0;
      has_initial = false;
      break;
  }
  const auto trajectory = teda::oracle_trajectory(config.scheduler, period, delay,
                                                  has_initial, rp.policy, rp.observe);
  teda::write_trajectory_csv_file(out_path, trajectory);
  std::cout << "oracle: " << trajectory.size() << " steps written to " << out_path
            << "\n";
  return kExitOk;
}

std::string dtype_name(const teda::AnyTensor& t) {
  return teda::is_quantized(t) ? "int16" : "float32";
}

void print_tensor_info(const std::string& label, const teda::AnyTensor& t) {
  const auto& shape = teda::shape_of(t);
  double lo = 0.0;
  double hi = 0.0;
  double scale = 1.0;
  if (teda::is_quantized(t)) {
    const auto& q = std::get<teda::QuantizedTensor>(t);
    scale = q.scale;
    if (!q.data.empty()) {
      lo = hi = q.data.front() * q.scale;
      for (std::int16_t c : q.data) {
        lo = std::min(lo, c * q.scale);
        hi = std::max(hi, c * q.scale);
      }
    }
  } else {
    const auto& f = std::get<teda::Tensor>(t);
    if (!f.data.empty()) {
      lo = hi = f.data.front();
      for (float v : f.data) {
        lo = std::min(lo, static_cast<double>(v));
        hi = std::max(hi, static_cast<double>(v));
      }
    }
  }
  std::printf("%s dtype=%s shape=%ux%ux%ux%u scale=%.12g min=%.6g max=%.6g checksum=%016llx\n",
              label.c_str(), dtype_name(t).c_str(), shape[0], shape[1], shape[2],
              shape[3], scale, lo, hi,
              static_cast<unsigned long long>(teda::payload_checksum(t)));
}

int cmd_inspect(const std::string& in_path) {
  if (teda::is_single_tensor_file(in_path)) {
    print_tensor_info("tensor", teda::read_tensor_file(in_path));
  } else {
    const auto tensors = teda::read_model_file(in_path);
    std::printf("model file: %zu tensors\n", tensors.size());
    for (const auto& nt : tensors) {
      print_tensor_info("  " + nt.name, nt.tensor);
    }
  }
  return kExitOk;
}

teda::AnyTensor convert_tensor(const teda::AnyTensor& in, bool to_int16,
                               const std::string& layout) {
  if (to_int16) {
    if (teda::is_quantized(in)) {
      throw std::invalid_argument("input tensor is already int16-quantized");
    }
    teda::Tensor t = std::get<teda::Tensor>(in);
    if (!layout.empty()) {
      // Reinterpret the stored dims under the hint and reorder the payload.
      const teda::LayoutHint hint = teda::layout_hint_from_string(layout);
      std::vector<std::uint32_t> raw(t.shape.begin(), t.shape.end());
      const std::size_t natural_rank =
          hint == teda::LayoutHint::vector ? 1
          : hint == teda::LayoutHint::already_nchw ? 4
                                                   : 3;
      while (raw.size() > natural_rank && raw.front() == 1) {
        raw.erase(raw.begin());
      }
      const teda::UnifyPlan plan = teda::unify_shape(raw, hint);
      t.data = plan.apply(t.data);
      t.shape = plan.nchw_shape;
    }
    return teda::quantize(t);
  }
  if (!teda::is_quantized(in)) {
    throw std::invalid_argument("input tensor is already float32");
  }
  return teda::dequantize(std::get<teda::QuantizedTensor>(in));
}

int cmd_quantize(const std::string& in_path, const std::string& out_path,
                 const std::string& layout, const std::string& to) {
  const bool to_int16 = to == "int16";
  if (teda::is_single_tensor_file(in_path)) {
    teda::write_tensor_file(out_path,
                            convert_tensor(teda::read_tensor_file(in_path),
                                           to_int16, layout));
  } else {
    if (!layout.empty()) {
      throw std::invalid_argument("--layout applies to single-tensor files only");
    }
    auto tensors = teda::read_model_file(in_path);
    for (auto& nt : tensors) {
      nt.tensor = convert_tensor(nt.tensor, to_int16, "");
    }
    teda::write_model_file(out_path, tensors);
  }
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pipelined action-chunking inference: scheduling simulator and "
               "tensor compression tools"};
  app.require_subcommand(1);

  CommonRunArgs run_args;
  std::string trace_path;
  std::string metrics_path;
  std::string out_path;
  std::string in_path;
  std::string layout;
  std::string to_dtype = "int16";
  bool realtime = false;

  auto add_run_options = [&](CLI::App* cmd, bool mode_required) {
    cmd->add_option("--config", run_args.config_path, "JSON run configuration")
        ->required();
    auto* mode_opt = cmd->add_option("--mode", run_args.mode_name,
                                     "teda, per_step_te or open_loop");
    if (mode_required) {
      mode_opt->check(CLI::IsMember({"teda", "per_step_te", "open_loop"}));
    }
    cmd->add_option("--seed", run_args.seed, "override the config's RNG seed");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run one scheduler mode");
  add_run_options(simulate, true);
  simulate->add_option("--trace", trace_path, "write the per-step trace CSV here");
  simulate->add_option("--metrics", metrics_path, "write the metrics JSON here");
  simulate->add_flag("--realtime", realtime,
                     "drive a wall-clock executor/predictor pair instead of "
                     "virtual time");

  CLI::App* compare_cmd =
      app.add_subcommand("compare", "run all three modes on identical inputs");
  add_run_options(compare_cmd, false);
  compare_cmd->add_option("--metrics", metrics_path, "write the report JSON here");

  CLI::App* oracle = app.add_subcommand(
      "oracle", "write the brute-force reference trajectory CSV");
  add_run_options(oracle, true);
  oracle->add_option("--out", out_path, "trajectory CSV path")->required();

  CLI::App* quantize =
      app.add_subcommand("quantize", "convert tensor containers between dtypes");
  quantize->add_option("--in", in_path, "input container")->required();
  quantize->add_option("--out", out_path, "output container")->required();
  quantize->add_option("--layout", layout,
                       "unify the input shape first: vector, hwc_image, "
                       "chw_image or nchw")
      ->check(CLI::IsMember({"vector", "hwc_image", "chw_image", "nchw"}));
  quantize->add_option("--to", to_dtype, "target dtype (default int16)")
      ->check(CLI::IsMember({"int16", "float32"}));

  CLI::App* inspect =
      app.add_subcommand("inspect", "print container shape, dtype and checksum");
  inspect->add_option("--in", in_path, "container to inspect")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      return cmd_simulate(run_args, trace_path, metrics_path, realtime);
    }
    if (compare_cmd->parsed()) {
      return cmd_compare(run_args, metrics_path);
    }
    if (oracle->parsed()) {
      return cmd_oracle(run_args, out_path);
    }
    if (quantize->parsed()) {
      return cmd_quantize(in_path, out_path, layout, to_dtype);
    }
    if (inspect->parsed()) {
      return cmd_inspect(in_path);
    }
  } catch (const teda::InfeasibleScheduleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}
