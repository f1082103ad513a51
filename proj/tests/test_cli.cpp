#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "teda/container.hpp"
#include "teda/tensor.hpp"
#include "teda/trace_io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = TEDA_CLI_PATH;
const std::string kFixtures = TEDA_FIXTURES_DIR;

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string out_path =
      (fs::temp_directory_path() / "teda_cli_out.txt").string();
  const std::string command = kCli + " " + args + " > " + out_path + " 2>&1";
  const int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = WEXITSTATUS(status);
  std::ifstream in(out_path);
  std::stringstream ss;
  ss << in.rdbuf();
  result.output = ss.str();
  return result;
}

std::string tmp(const std::string& name) {
  return (fs::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json load_json(const std::string& path) {
  return nlohmann::json::parse(slurp(path));
}

}  // namespace

TEST_CASE("simulate reproduces the per-step numbers through the CLI") {
  const std::string metrics = tmp("teda_cli_metrics.json");

  CliResult r = run_cli("simulate --config " + kFixtures +
                        "/x5.json --mode teda --metrics " + metrics);
  REQUIRE(r.exit_code == 0);
  nlohmann::json j = load_json(metrics);
  CHECK(std::abs(j["per_step_s"].get<double>() - 0.041) <= 1e-9);
  CHECK(j["schedule"]["dropped_per_chunk"].get<int>() == 3);

  r = run_cli("simulate --config " + kFixtures +
              "/x5.json --mode per_step_te --metrics " + metrics);
  REQUIRE(r.exit_code == 0);
  j = load_json(metrics);
  CHECK(std::abs(j["per_step_s"].get<double>() - 0.161) <= 1e-9);

  r = run_cli("simulate --config " + kFixtures +
              "/pc.json --mode per_step_te --metrics " + metrics);
  REQUIRE(r.exit_code == 0);
  j = load_json(metrics);
  CHECK(std::abs(j["per_step_s"].get<double>() - 0.066) <= 1e-9);
}

TEST_CASE("bad inputs exit 1, infeasible schedules exit 2") {
  CliResult r = run_cli("simulate --config /nonexistent/config.json --mode teda");
  CHECK(r.exit_code == 1);

  r = run_cli("simulate --config " + kFixtures + "/x5_noisu.json --mode teda");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("infeasible") != std::string::npos);

  // The same config still runs serially.
  r = run_cli("simulate --config " + kFixtures + "/x5_noisu.json --mode per_step_te");
  CHECK(r.exit_code == 0);
}

TEST_CASE("malformed config keys are rejected") {
  const std::string bad = tmp("teda_cli_bad_config.json");
  {
    std::ofstream out(bad);
    out << R"({"chunk_size": 25, "episode_length": 120, "action_dim": 2,
               "t1": 0.01, "t2": 0.02, "t3": 0.001, "t4": 0.04,
               "policy": {"type": "scripted"}, "unknown_knob": 3})";
  }
  CliResult r = run_cli("simulate --config " + bad + " --mode teda");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("unknown_knob") != std::string::npos);

  // Timing must be explicit.
  {
    std::ofstream out(bad, std::ios::trunc);
    out << R"({"chunk_size": 25, "episode_length": 120, "action_dim": 2,
               "t1": 0.01, "t2": 0.02, "t3": 0.001,
               "policy": {"type": "scripted"}})";
  }
  r = run_cli("simulate --config " + bad + " --mode teda");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("t4") != std::string::npos);
}

TEST_CASE("the oracle command cross-checks simulate's trajectory") {
  const std::string trace = tmp("teda_cli_trace.csv");
  const std::string oracle = tmp("teda_cli_oracle.csv");

  for (const std::string mode : {"teda", "per_step_te", "open_loop"}) {
    CliResult r = run_cli("simulate --config " + kFixtures + "/x5.json --mode " +
                          mode + " --trace " + trace);
    REQUIRE(r.exit_code == 0);
    r = run_cli("oracle --config " + kFixtures + "/x5.json --mode " + mode +
                " --out " + oracle);
    REQUIRE(r.exit_code == 0);

    const auto simulated = teda::read_trajectory_csv_file(trace);
    const auto reference = teda::read_trajectory_csv_file(oracle);
    REQUIRE(simulated.size() == reference.size());
    REQUIRE(simulated.size() == 120);
    for (std::size_t t = 0; t < simulated.size(); ++t) {
      REQUIRE(simulated[t].size() == reference[t].size());
      for (std::size_t d = 0; d < simulated[t].size(); ++d) {
        CHECK(std::abs(simulated[t][d] - reference[t][d]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("identical invocations produce identical bytes") {
  const std::string trace_a = tmp("teda_cli_det_a.csv");
  const std::string trace_b = tmp("teda_cli_det_b.csv");
  const std::string metrics_a = tmp("teda_cli_det_a.json");
  const std::string metrics_b = tmp("teda_cli_det_b.json");

  REQUIRE(run_cli("simulate --config " + kFixtures + "/x5.json --mode teda --trace " +
                  trace_a + " --metrics " + metrics_a)
              .exit_code == 0);
  REQUIRE(run_cli("simulate --config " + kFixtures + "/x5.json --mode teda --trace " +
                  trace_b + " --metrics " + metrics_b)
              .exit_code == 0);
  CHECK(slurp(trace_a) == slurp(trace_b));
  CHECK(slurp(metrics_a) == slurp(metrics_b));
}

TEST_CASE("compare emits the three-mode report") {
  const std::string report_path = tmp("teda_cli_compare.json");
  CliResult r = run_cli("compare --config " + kFixtures + "/x5.json --metrics " +
                        report_path);
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("per_step_te") != std::string::npos);
  const nlohmann::json j = load_json(report_path);
  CHECK(std::abs(j["deltas"]["speedup_vs_per_step_te"].get<double>() -
                 0.161 / 0.041) <= 1e-6);
  CHECK(std::abs(j["teda"]["per_step_s"].get<double>() - 0.041) <= 1e-9);
  CHECK(std::abs(j["open_loop"]["max_gap_s"].get<double>() - 0.161) <= 1e-9);
}

TEST_CASE("quantize and inspect run the compression pipeline end to end") {
  const std::string float_path = tmp("teda_cli_tensor_f32.tdac");
  const std::string quant_path = tmp("teda_cli_tensor_i16.tdac");
  const std::string roundtrip_path = tmp("teda_cli_tensor_rt.tdac");
  const std::string requant_path = tmp("teda_cli_tensor_rq.tdac");

  teda::Tensor t;
  t.shape = {1, 4, 5, 3};  // stored HWC payload, one leading batch dim
  t.data.resize(60);
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    t.data[i] = static_cast<float>(i) * 0.125f - 3.0f;
  }
  teda::write_tensor_file(float_path, t);

  CliResult r = run_cli("quantize --in " + float_path + " --out " + quant_path +
                        " --layout hwc_image");
  REQUIRE(r.exit_code == 0);
  r = run_cli("inspect --in " + quant_path);
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("dtype=int16") != std::string::npos);
  CHECK(r.output.find("shape=1x3x4x5") != std::string::npos);

  // quantize -> dequantize -> quantize is byte-stable.
  r = run_cli("quantize --in " + quant_path + " --out " + roundtrip_path +
              " --to float32");
  REQUIRE(r.exit_code == 0);
  r = run_cli("quantize --in " + roundtrip_path + " --out " + requant_path);
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(requant_path) == slurp(quant_path));

  // Quantizing an int16 file again is an input error.
  r = run_cli("quantize --in " + quant_path + " --out " + requant_path);
  CHECK(r.exit_code == 1);
}

TEST_CASE("inspect rejects truncated containers") {
  const std::string path = tmp("teda_cli_truncated.tdac");
  teda::write_tensor_file(path, teda::Tensor::vector1d({1.0f, 2.0f, 3.0f}));
  const std::string bytes = slurp(path);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 4));
  }
  CliResult r = run_cli("inspect --in " + path);
  CHECK(r.exit_code == 1);
}

TEST_CASE("the bundled model fixtures quantize through the CLI") {
  const std::string out_path = tmp("teda_cli_model_i16.tdac");
  CliResult r = run_cli("quantize --in " + kFixtures + "/tinymlp_f32.tdac --out " +
                        out_path);
  REQUIRE(r.exit_code == 0);
  r = run_cli("inspect --in " + out_path);
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("layer0.weight") != std::string::npos);
  CHECK(r.output.find("dtype=int16") != std::string::npos);
}
