#pragma once

// Run aggregation (best of runs, better of backends), ranking with the
// execution-time tie-break, and grasp statistics.

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "rbench/core/error.hpp"
#include "rbench/scoring/evaluation.hpp"
#include "rbench/util/format.hpp"

namespace rbench::scoring {

struct GraspStats {
  int successes = 0;
  int attempts = 0;

  GraspStats& operator+=(const GraspStats& o) {
    successes += o.successes;
    attempts += o.attempts;
    return *this;
  }

  friend bool operator==(const GraspStats&, const GraspStats&) = default;
};

/// successes / attempts, or nullopt ("N/A") when nothing was attempted.
inline std::optional<double> grasp_success_rate(int successes, int attempts) {
  if (successes < 0 || attempts < 0 || successes > attempts) {
    throw Error(ErrorCode::InvalidCounts,
                std::to_string(successes) + "/" + std::to_string(attempts) + " is not a valid grasp count");
  }
  if (attempts == 0) return std::nullopt;
  return static_cast<double>(successes) / static_cast<double>(attempts);
}

/// "26/33=78.8%" or "N/A".
inline std::string format_grasp_rate(const GraspStats& g) {
  const auto rate = grasp_success_rate(g.successes, g.attempts);
  if (!rate) return "N/A";
  return std::to_string(g.successes) + "/" + std::to_string(g.attempts) + "=" + format_pct(100.0 * *rate);
}

/// One complete pass of a solution over a task set.
struct RunScore {
  std::string run_id;
  std::vector<TaskScore> task_scores;
  double average_error = 0.0;           ///< cm, mean of task errors
  double total_execution_time_s = 0.0;  ///< summed per-task wall clock
  GraspStats grasp;

  friend bool operator==(const RunScore&, const RunScore&) = default;
};

inline RunScore make_run_score(std::string run_id, std::vector<TaskScore> task_scores, double total_time_s,
                               GraspStats grasp = {}) {
  if (task_scores.empty()) throw Error(ErrorCode::EmptyInput, "run '" + run_id + "' has no task scores");
  double total = 0.0;
  for (const auto& t : task_scores) total += t.task_error;
  RunScore run;
  run.run_id = std::move(run_id);
  run.average_error = total / static_cast<double>(task_scores.size());
  run.task_scores = std::move(task_scores);
  run.total_execution_time_s = total_time_s;
  run.grasp = grasp;
  return run;
}

namespace detail {

/// Lower error wins, then shorter time, then the lexicographically smaller run id.
inline bool run_better(const RunScore& a, const RunScore& b) {
  return std::tie(a.average_error, a.total_execution_time_s, a.run_id) <
         std::tie(b.average_error, b.total_execution_time_s, b.run_id);
}

}  // namespace detail

inline RunScore aggregate_best_of_runs(const std::vector<RunScore>& runs) {
  if (runs.empty()) throw Error(ErrorCode::EmptyInput, "no runs to aggregate");
  return *std::min_element(runs.begin(), runs.end(), detail::run_better);
}

/// Same ordering as aggregate_best_of_runs; a full tie keeps the first argument.
inline RunScore aggregate_better_backend(const RunScore& a, const RunScore& b) {
  return detail::run_better(b, a) ? b : a;
}

struct RankInput {
  std::string team_id;
  double final_error = 0.0;  ///< cm
  double improvement_pct = 0.0;
  double total_execution_time_s = 0.0;
  GraspStats grasp;
};

struct RankedEntry {
  std::string team_id;
  double final_error = 0.0;
  double improvement_pct = 0.0;
  double total_execution_time_s = 0.0;
  GraspStats grasp;
  int rank = 0;
  bool qualified = false;  ///< improvement > 0

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

/// Sorts by (error, execution time, team id), all ascending, and assigns
/// ranks 1..n without gaps.
inline std::vector<RankedEntry> rank(std::vector<RankInput> entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const RankInput& a, const RankInput& b) {
    return std::tie(a.final_error, a.total_execution_time_s, a.team_id) <
           std::tie(b.final_error, b.total_execution_time_s, b.team_id);
  });
  std::vector<RankedEntry> out;
  out.reserve(entries.size());
  int next = 1;
  for (auto& e : entries) {
    out.push_back({std::move(e.team_id), e.final_error, e.improvement_pct, e.total_execution_time_s, e.grasp, next++,
                   e.improvement_pct > 0.0});
  }
  return out;
}

/// Builds rank inputs from per-team final runs against one baseline.
inline std::vector<RankInput> rank_inputs(const std::vector<std::pair<std::string, RunScore>>& team_runs,
                                          double baseline) {
  std::vector<RankInput> out;
  for (const auto& [team, run] : team_runs) {
    out.push_back({team, run.average_error, improvement(run.average_error, baseline), run.total_execution_time_s,
                   run.grasp});
  }
  return out;
}

/// Leaderboard CSV: rank,team_id,error_cm,improvement_pct,time_s,grasp_rate,
/// followed by a baseline row when a baseline is given.
inline std::string leaderboard_csv(const std::vector<RankedEntry>& entries, std::optional<double> baseline) {
  std::ostringstream out;
  out << "rank,team_id,error_cm,improvement_pct,time_s,grasp_rate\n";
  for (const auto& e : entries) {
    out << e.rank << ',' << e.team_id << ',' << format_cm(e.final_error) << ',' << fixed(e.improvement_pct, 1) << ','
        << fixed(e.total_execution_time_s, 2) << ',' << format_grasp_rate(e.grasp) << '\n';
  }
  if (baseline) out << "Baseline,," << format_cm(*baseline) << ",N/A,N/A,N/A\n";
  return out.str();
}

/// Fixed-width table in the style of the published result tables.
inline std::string leaderboard_table(const std::vector<RankedEntry>& entries, std::optional<double> baseline) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-9s %-20s %9s %12s %10s  %s\n", "Rank", "Team", "Error", "Improvement",
                "Time[s]", "Grasp success rate");
  out << line;
  for (const auto& e : entries) {
    std::snprintf(line, sizeof line, "%-9d %-20s %9s %12s %10s  %s\n", e.rank, e.team_id.c_str(),
                  format_cm(e.final_error).c_str(), format_pct(e.improvement_pct).c_str(),
                  fixed(e.total_execution_time_s, 1).c_str(), format_grasp_rate(e.grasp).c_str());
    out << line;
  }
  if (baseline) {
    std::snprintf(line, sizeof line, "%-9s %-20s %9s %12s %10s  %s\n", "Baseline", "", format_cm(*baseline).c_str(),
                  "N/A", "", "N/A");
    out << line;
  }
  return out.str();
}

}  // namespace rbench::scoring
