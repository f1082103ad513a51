#include "teda/trace_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace teda {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_seconds_us(std::int64_t us) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%lld.%06lld",
                static_cast<long long>(us / 1'000'000),
                static_cast<long long>(us % 1'000'000));
  return buf;
}

std::string format_action_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ordered_json metrics_to_json(const SimResult& result) {
  const MetricsReport& m = result.metrics;
  ordered_json j;
  j["mode"] = to_string(result.mode);
  j["per_step_s"] = m.per_step_s;
  j["total_wall_s"] = m.total_wall_s;
  j["startup_s"] = m.startup_s;
  j["max_gap_s"] = m.max_gap_s;
  j["dropped_total"] = m.dropped_total;
  j["ensemble_size_mean"] = m.ensemble_size_mean;
  j["ensemble_size_max"] = m.ensemble_size_max;
  j["jitter"] = m.jitter;
  if (m.trajectory_rmse.has_value()) {
    j["trajectory_rmse"] = *m.trajectory_rmse;
  }
  j["predictions_launched"] = m.predictions_launched;
  j["predictions_committed"] = m.predictions_committed;
  j["deadline_misses"] = result.trace.deadline_misses;
  if (result.schedule.has_value()) {
    ordered_json s;
    s["dropped_per_chunk"] = result.schedule->dropped_per_chunk;
    s["max_predictions"] = result.schedule->max_predictions;
    s["buffer_cols"] = result.schedule->buffer_cols;
    s["exec_hz"] = result.schedule->exec_hz;
    if (std::isfinite(result.schedule->pred_hz)) {
      s["pred_hz"] = result.schedule->pred_hz;
    } else {
      s["pred_hz"] = nullptr;
    }
    j["schedule"] = s;
  }
  return j;
}

}  // namespace

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  const std::size_t dim =
      trace.steps.empty() ? 0 : trace.steps.front().action.size();
  out << "step,wall_time_s,ensemble_size,drops_cum,stall_s,inflight";
  for (std::size_t d = 0; d < dim; ++d) {
    out << ",a" << d;
  }
  out << "\n";
  for (const SimStep& s : trace.steps) {
    out << s.step << ',' << format_seconds_us(s.wall_us) << ',' << s.ensemble_size
        << ',' << s.drops_cum << ',' << format_seconds_us(s.stall_us) << ','
        << (s.prediction_inflight ? 1 : 0);
    for (double v : s.action) {
      out << ',' << format_action_value(v);
    }
    out << "\n";
  }
}

void write_trace_csv_file(const std::string& path, const SimTrace& trace) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  write_trace_csv(out, trace);
}

void write_trajectory_csv(std::ostream& out,
                          const std::vector<ActionVector>& trajectory) {
  const std::size_t dim = trajectory.empty() ? 0 : trajectory.front().size();
  out << "step";
  for (std::size_t d = 0; d < dim; ++d) {
    out << ",a" << d;
  }
  out << "\n";
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    out << (t + 1);
    for (double v : trajectory[t]) {
      out << ',' << format_action_value(v);
    }
    out << "\n";
  }
}

void write_trajectory_csv_file(const std::string& path,
                               const std::vector<ActionVector>& trajectory) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  write_trajectory_csv(out, trajectory);
}

std::vector<ActionVector> read_trajectory_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "' for reading");
  }
  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error("empty CSV '" + path + "'");
  }
  std::stringstream hs(header);
  std::string column;
  int first_action_col = -1;
  int col = 0;
  while (std::getline(hs, column, ',')) {
    if (first_action_col < 0 && column.size() >= 2 && column[0] == 'a' &&
        std::isdigit(static_cast<unsigned char>(column[1]))) {
      first_action_col = col;
    }
    ++col;
  }
  if (first_action_col < 0) {
    throw std::runtime_error("CSV '" + path + "' has no action columns");
  }

  std::vector<ActionVector> trajectory;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::stringstream ls(line);
    std::string cell;
    ActionVector action;
    for (int c = 0; std::getline(ls, cell, ','); ++c) {
      if (c >= first_action_col) {
        action.push_back(std::stod(cell));
      }
    }
    trajectory.push_back(std::move(action));
  }
  return trajectory;
}

std::string metrics_json(const SimResult& result) {
  return metrics_to_json(result).dump(2) + "\n";
}

std::string comparison_json(const ComparisonReport& report) {
  ordered_json j;
  j["teda"] = metrics_to_json(report.teda);
  j["per_step_te"] = metrics_to_json(report.per_step_te);
  j["open_loop"] = metrics_to_json(report.open_loop);
  ordered_json d;
  d["speedup_vs_per_step_te"] = report.speedup_vs_per_step_te;
  d["gap_ratio_vs_open_loop"] = report.gap_ratio_vs_open_loop;
  if (report.jitter_ratio_vs_open_loop.has_value()) {
    d["jitter_ratio_vs_open_loop"] = *report.jitter_ratio_vs_open_loop;
  } else {
    d["jitter_ratio_vs_open_loop"] = nullptr;
  }
  j["deltas"] = d;
  return j.dump(2) + "\n";
}

std::string comparison_table(const ComparisonReport& report) {
  std::ostringstream out;
  auto row = [&](const SimResult& r) {
    out << std::left << std::setw(14) << to_string(r.mode) << std::right
        << std::fixed << std::setprecision(6) << std::setw(12)
        << r.metrics.per_step_s << std::setw(12) << r.metrics.total_wall_s
        << std::setw(12) << r.metrics.max_gap_s << std::setw(12)
        << std::setprecision(5) << r.metrics.jitter << std::setw(9)
        << r.metrics.dropped_total << "\n";
  };
  out << std::left << std::setw(14) << "mode" << std::right << std::setw(12)
      << "per_step_s" << std::setw(12) << "total_s" << std::setw(12)
      << "max_gap_s" << std::setw(12) << "jitter" << std::setw(9) << "drops"
      << "\n";
  row(report.teda);
  row(report.per_step_te);
  row(report.open_loop);
  out << std::fixed << std::setprecision(2) << "speedup vs per_step_te: "
      << report.speedup_vs_per_step_te << "x; max-gap ratio vs open_loop: "
      << report.gap_ratio_vs_open_loop << "x\n";
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << content;
}

}  // namespace teda
