#pragma once

// Versioned JSONL trajectory records: one episode per line, with the reward
// breakdown embedded. Parsing is only as strict as replaying a log needs.

#include <iosfwd>
#include <string>
#include <string_view>

#include "zoomrl/reward.hpp"

namespace zoomrl {

inline constexpr std::string_view kTrajectorySchema = "zoomrl.trajectory/1";

std::string trajectory_to_jsonl(const Trajectory& traj, const RewardBreakdown& reward);

/// Appends one line (record + '\n') to `out`.
void write_trajectory(std::ostream& out, const Trajectory& traj, const RewardBreakdown& reward);

struct TrajectorySummary {
  std::uint64_t seed = 0;
  Difficulty difficulty = Difficulty::kHard;
  std::optional<std::string> final_answer;
  int T = 0;
  Termination termination = Termination::kMaxTurns;
  std::vector<std::optional<BBox>> boxes_in_original;
  RewardBreakdown reward;
};

/// Throws Error{kIo} on a malformed line or a schema mismatch.
TrajectorySummary trajectory_summary_from_jsonl(std::string_view line);

}  // namespace zoomrl
