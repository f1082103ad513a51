#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "teda/sim.hpp"

namespace teda {

/// CSV columns: step,wall_time_s,ensemble_size,drops_cum,stall_s,inflight,
/// a0..a{A-1}. Wall times print with microsecond precision, actions with
/// full round-trip precision, so identical runs give identical bytes.
void write_trace_csv(std::ostream& out, const SimTrace& trace);
void write_trace_csv_file(const std::string& path, const SimTrace& trace);

/// Trajectory-only CSV (step,a0..a{A-1}); the oracle command's output.
void write_trajectory_csv(std::ostream& out,
                          const std::vector<ActionVector>& trajectory);
void write_trajectory_csv_file(const std::string& path,
                               const std::vector<ActionVector>& trajectory);

/// Reads the action columns back from either CSV flavor.
std::vector<ActionVector> read_trajectory_csv_file(const std::string& path);

/// MetricsReport as JSON, snake_case keys in declaration order.
std::string metrics_json(const SimResult& result);
std::string comparison_json(const ComparisonReport& report);

/// Fixed-width per-mode summary for the terminal.
std::string comparison_table(const ComparisonReport& report);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace teda
