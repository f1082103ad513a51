#pragma once

#include <vector>

#include "teda/core_types.hpp"
#include "teda/policy.hpp"

namespace teda {

/// Brute-force reference trajectory: materializes every prediction a run
/// would commit, then evaluates each step's weighted average directly over
/// all non-dropped actions targeting it. Shares nothing with the
/// incremental scheduler beyond the policy itself, so the two paths check
/// each other.
///
/// launch_period/commit_delay follow the mode being checked: the pipelined
/// scheduler uses (D, D), the per-step ensemble baseline (1, 1), open-loop
/// chunking (k, 0, no initial chunk).
std::vector<ActionVector> oracle_trajectory(const SchedulerConfig& cfg,
                                            int launch_period, int commit_delay,
                                            bool has_initial,
                                            const PolicyHandle& policy,
                                            const ObservationFn& observe);

}  // namespace teda
