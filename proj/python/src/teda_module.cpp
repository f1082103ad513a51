#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "teda/baselines.hpp"
#include "teda/container.hpp"
#include "teda/core_types.hpp"
#include "teda/oracle.hpp"
#include "teda/policy.hpp"
#include "teda/scheduler.hpp"
#include "teda/sim.hpp"
#include "teda/tensor.hpp"

namespace py = pybind11;
using namespace teda;

namespace {

// Python-side policies hand back chunks as list[list[float]].
PolicyHandle wrap_policy(
    const std::function<std::vector<ActionVector>(int)>& predict) {
  PolicyHandle handle;
  handle.predict = [predict](const Observation&, int start) {
    return predict(start);
  };
  return handle;
}

PolicyHandle scripted_sine(int action_dim, int chunk_size, double amplitude,
                           double period_steps, double staleness) {
  ScriptedPolicy scripted;
  scripted.target = sine_trajectory(action_dim, amplitude, period_steps);
  if (staleness != 0.0) {
    scripted.staleness = linear_staleness(staleness);
  }
  return make_scripted_policy(std::move(scripted), chunk_size);
}

py::dict metrics_dict(const SimResult& r) {
  py::dict d;
  d["mode"] = to_string(r.mode);
  d["per_step_s"] = r.metrics.per_step_s;
  d["total_wall_s"] = r.metrics.total_wall_s;
  d["startup_s"] = r.metrics.startup_s;
  d["max_gap_s"] = r.metrics.max_gap_s;
  d["dropped_total"] = r.metrics.dropped_total;
  d["ensemble_size_mean"] = r.metrics.ensemble_size_mean;
  d["ensemble_size_max"] = r.metrics.ensemble_size_max;
  d["jitter"] = r.metrics.jitter;
  if (r.metrics.trajectory_rmse.has_value()) {
    d["trajectory_rmse"] = *r.metrics.trajectory_rmse;
  }
  d["predictions_launched"] = r.metrics.predictions_launched;
  d["predictions_committed"] = r.metrics.predictions_committed;
  return d;
}

}  // namespace

PYBIND11_MODULE(_teda, m) {
  m.doc() = "Pipelined action-chunking inference: scheduler, simulator and "
            "int16 tensor compression";

  py::register_exception<InfeasibleScheduleError>(m, "InfeasibleScheduleError");

  py::enum_<Mode>(m, "Mode")
      .value("teda", Mode::teda)
      .value("per_step_te", Mode::per_step_te)
      .value("open_loop", Mode::open_loop);

  py::class_<SchedulerConfig>(m, "SchedulerConfig")
      .def(py::init([](int chunk_size, int episode_length, double weight_decay,
                       int action_dim) {
             SchedulerConfig cfg;
             cfg.chunk_size = chunk_size;
             cfg.episode_length = episode_length;
             cfg.weight_decay = weight_decay;
             cfg.action_dim = action_dim;
             cfg.validate();
             return cfg;
           }),
           py::arg("chunk_size"), py::arg("episode_length"),
           py::arg("weight_decay") = 0.01, py::arg("action_dim") = 1)
      .def_readonly("chunk_size", &SchedulerConfig::chunk_size)
      .def_readonly("episode_length", &SchedulerConfig::episode_length)
      .def_readonly("weight_decay", &SchedulerConfig::weight_decay)
      .def_readonly("action_dim", &SchedulerConfig::action_dim);

  py::class_<TimingModel>(m, "TimingModel")
      .def(py::init([](double t1, double t2, double t3, double t4) {
             TimingModel tm{t1, t2, t3, t4};
             tm.validate();
             return tm;
           }),
           py::arg("t1"), py::arg("t2"), py::arg("t3"), py::arg("t4"))
      .def_readonly("t1", &TimingModel::observation_s)
      .def_readonly("t2", &TimingModel::prediction_s)
      .def_readonly("t3", &TimingModel::communication_s)
      .def_readonly("t4", &TimingModel::execution_s);

  py::class_<DerivedSchedule>(m, "DerivedSchedule")
      .def_readonly("dropped_per_chunk", &DerivedSchedule::dropped_per_chunk)
      .def_readonly("max_predictions", &DerivedSchedule::max_predictions)
      .def_readonly("buffer_cols", &DerivedSchedule::buffer_cols)
      .def_readonly("exec_hz", &DerivedSchedule::exec_hz)
      .def_readonly("pred_hz", &DerivedSchedule::pred_hz)
      .def("__repr__", [](const DerivedSchedule& s) {
        return "DerivedSchedule(D=" + std::to_string(s.dropped_per_chunk) +
               ", T_p=" + std::to_string(s.max_predictions) +
               ", C=" + std::to_string(s.buffer_cols) + ")";
      });

  m.def("derive_schedule", &derive_schedule, py::arg("config"), py::arg("timing"));
  m.def("ensemble_weights", &ensemble_weights, py::arg("n"), py::arg("decay"));
  m.def(
      "weighted_apply",
      [](const std::vector<ActionVector>& actions, const std::vector<double>& w) {
        return weighted_apply(actions, w);
      },
      py::arg("actions"), py::arg("weights"));

  py::class_<PolicyHandle>(m, "Policy")
      .def("predict",
           [](const PolicyHandle& p, int start_step) {
             Tensor empty;
             empty.shape = {1, 1, 1, 0};
             return p.predict(empty, start_step);
           },
           py::arg("start_step"));

  m.def("scripted_sine_policy", &scripted_sine, py::arg("action_dim"),
        py::arg("chunk_size"), py::arg("amplitude") = 1.0,
        py::arg("period_steps") = 50.0, py::arg("staleness") = 0.0);
  m.def("callable_policy", &wrap_policy, py::arg("predict"),
        "wrap a python callable start_step -> list of k action lists");

  m.def(
      "run_episode",
      [](const SchedulerConfig& cfg, const TimingModel& tm,
         const PolicyHandle& policy) {
        const DerivedSchedule sched = derive_schedule(cfg, tm);
        const EpisodeResult r = run_episode(cfg, sched, policy, empty_observations());
        py::dict d;
        d["trajectory"] = r.trajectory;
        d["dropped_total"] = r.drops.total;
        d["drops_per_prediction"] = r.drops.per_prediction;
        d["ensemble_sizes"] = r.ensemble_sizes;
        d["predictions_launched"] = r.predictions_launched;
        d["predictions_committed"] = r.predictions_committed;
        return d;
      },
      py::arg("config"), py::arg("timing"), py::arg("policy"));

  m.def(
      "simulate",
      [](const SchedulerConfig& cfg, const TimingModel& tm, Mode mode,
         const PolicyHandle& policy) {
        const SimResult r = simulate(cfg, tm, mode, policy, empty_observations());
        py::dict d = metrics_dict(r);
        d["trajectory"] = r.trajectory;
        return d;
      },
      py::arg("config"), py::arg("timing"), py::arg("mode"), py::arg("policy"));

  m.def(
      "compare",
      [](const SchedulerConfig& cfg, const TimingModel& tm,
         const PolicyHandle& policy) {
        const ComparisonReport r = compare(cfg, tm, policy, empty_observations());
        py::dict d;
        d["teda"] = metrics_dict(r.teda);
        d["per_step_te"] = metrics_dict(r.per_step_te);
        d["open_loop"] = metrics_dict(r.open_loop);
        d["speedup_vs_per_step_te"] = r.speedup_vs_per_step_te;
        d["gap_ratio_vs_open_loop"] = r.gap_ratio_vs_open_loop;
        return d;
      },
      py::arg("config"), py::arg("timing"), py::arg("policy"));

  m.def(
      "oracle_trajectory",
      [](const SchedulerConfig& cfg, const TimingModel& tm, Mode mode,
         const PolicyHandle& policy) {
        int period = 1;
        int delay = 1;
        bool has_initial = true;
        if (mode == Mode::teda) {
          const DerivedSchedule sched = derive_schedule(cfg, tm);
          period = delay = sched.dropped_per_chunk;
        } else if (mode == Mode::open_loop) {
          period = cfg.chunk_size;
          delay = 0;
          has_initial = false;
        }
        return oracle_trajectory(cfg, period, delay, has_initial, policy,
                                 empty_observations());
      },
      py::arg("config"), py::arg("timing"), py::arg("mode"), py::arg("policy"));

  py::class_<Tensor>(m, "Tensor")
      .def(py::init([](const std::vector<std::uint32_t>& shape,
                       const std::vector<float>& data) {
             if (shape.size() != 4) {
               throw std::invalid_argument("shape must have 4 dims (N,C,H,W)");
             }
             Tensor t;
             t.shape = {shape[0], shape[1], shape[2], shape[3]};
             t.data = data;
             t.validate();
             return t;
           }),
           py::arg("shape"), py::arg("data"))
      .def_static("vector1d", &Tensor::vector1d, py::arg("values"))
      .def_property_readonly(
          "shape",
          [](const Tensor& t) {
            return std::vector<std::uint32_t>(t.shape.begin(), t.shape.end());
          })
      .def_readonly("data", &Tensor::data);

  py::class_<QuantizedTensor>(m, "QuantizedTensor")
      .def_property_readonly(
          "shape",
          [](const QuantizedTensor& t) {
            return std::vector<std::uint32_t>(t.shape.begin(), t.shape.end());
          })
      .def_readonly("scale", &QuantizedTensor::scale)
      .def_readonly("data", &QuantizedTensor::data);

  m.def("quantize", &quantize, py::arg("tensor"));
  m.def("dequantize", &dequantize, py::arg("tensor"));
  m.def(
      "unify_shape",
      [](const std::vector<std::uint32_t>& raw_shape, const std::string& hint) {
        const UnifyPlan plan = unify_shape(raw_shape, layout_hint_from_string(hint));
        py::dict d;
        d["nchw_shape"] =
            std::vector<std::uint32_t>(plan.nchw_shape.begin(), plan.nchw_shape.end());
        d["axis_perm"] = std::vector<int>(plan.axis_perm.begin(), plan.axis_perm.end());
        d["identity"] = plan.is_identity();
        return d;
      },
      py::arg("raw_shape"), py::arg("layout"));
  m.def(
      "accuracy_ratio",
      [](const std::vector<Tensor>& gt, const std::vector<Tensor>& ref,
         const std::vector<Tensor>& cand) {
        const AccuracyReport r = accuracy_ratio(gt, ref, cand);
        py::dict d;
        d["mse_reference"] = r.mse_reference;
        d["mse_candidate"] = r.mse_candidate;
        d["trials"] = r.trials;
        if (r.ratio.has_value()) {
          d["ratio"] = *r.ratio;
        } else {
          d["ratio"] = py::none();
        }
        return d;
      },
      py::arg("ground_truth"), py::arg("reference_preds"), py::arg("candidate_preds"));

  m.def("write_tensor_file",
        [](const std::string& path, const Tensor& t) { write_tensor_file(path, t); },
        py::arg("path"), py::arg("tensor"));
  m.def("write_quantized_file",
        [](const std::string& path, const QuantizedTensor& t) {
          write_tensor_file(path, t);
        },
        py::arg("path"), py::arg("tensor"));
  m.def(
      "read_tensor_file",
      [](const std::string& path) -> py::object {
        const AnyTensor t = read_tensor_file(path);
        if (is_quantized(t)) {
          return py::cast(std::get<QuantizedTensor>(t));
        }
        return py::cast(std::get<Tensor>(t));
      },
      py::arg("path"));
}
