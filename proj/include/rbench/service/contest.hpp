#pragma once

// Contest definitions, submission payloads, and the pure evaluation of a
// payload against a contest's task set.

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rbench/harness/executor.hpp"
#include "rbench/scoring/report.hpp"

namespace rbench::service {

enum class Stage { Trial, Contest, Closed };

inline std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Trial: return "trial";
    case Stage::Contest: return "contest";
    case Stage::Closed: return "closed";
  }
  return "?";
}

inline Stage stage_from_string(const std::string& s) {
  if (s == "trial") return Stage::Trial;
  if (s == "contest") return Stage::Contest;
  if (s == "closed") return Stage::Closed;
  throw Error(ErrorCode::Parse, "unknown stage '" + s + "'");
}

/// Only forward moves Trial -> Contest -> Closed are allowed.
inline void check_transition(Stage from, Stage to) {
  const bool ok = (from == Stage::Trial && to == Stage::Contest) || (from == Stage::Contest && to == Stage::Closed);
  if (!ok) {
    throw Error(ErrorCode::InvalidTransition,
                std::string(to_string(from)) + " -> " + std::string(to_string(to)) + " is not allowed");
  }
}

enum class TeamSelection { Best, Latest };

struct ContestConfig {
  std::string contest_id;
  scoring::UebPolicy policy;
  int runs_per_team = 1;
  int backends = 1;
  Stage stage = Stage::Trial;  ///< stage at creation; later moves live in the record log
  bool beat_baseline_only = true;
  TeamSelection selection = TeamSelection::Best;
  std::size_t max_payload_bytes = 8u << 20;
  harness::ExecutionConfig execution;
  std::vector<Task> trial_tasks;
  std::vector<Task> contest_tasks;

  void check() const {
    if (contest_id.empty()) throw Error(ErrorCode::InvalidArgument, "contest_id must not be empty");
    if (runs_per_team < 1) throw Error(ErrorCode::InvalidArgument, "runs_per_team must be >= 1");
    if (backends < 1) throw Error(ErrorCode::InvalidArgument, "backends must be >= 1");
    execution.check();
  }

  /// Tasks evaluated in the given stage (Closed keeps the contest set).
  const std::vector<Task>& tasks_for(Stage s) const { return s == Stage::Trial ? trial_tasks : contest_tasks; }
};

/// Mean of the per-task baseline errors over a task set.
inline double task_set_baseline(const std::vector<Task>& tasks, const scoring::UebPolicy& policy) {
  if (tasks.empty()) throw Error(ErrorCode::EmptyInput, "empty task set");
  double total = 0.0;
  for (const auto& t : tasks) total += scoring::baseline_error(t, policy);
  return total / static_cast<double>(tasks.size());
}

namespace detail {

inline std::vector<Task> load_task_refs(const Json& refs, const std::filesystem::path& base) {
  std::vector<Task> out;
  for (const auto& ref : refs) {
    if (ref.is_object()) {
      out.push_back(task_from_json(ref));
      continue;
    }
    const std::filesystem::path p = base / ref.get<std::string>();
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> files;
      for (const auto& e : std::filesystem::directory_iterator(p)) {
        if (e.path().extension() == ".json" && e.path().filename() != "manifest.json") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) out.push_back(load_task(f));
    } else {
      out.push_back(load_task(p));
    }
  }
  return out;
}

}  // namespace detail

/// Contest file. Task sets come from "trial_tasks" / "contest_tasks" (task
/// file paths, directories, or inline task objects) and/or from
/// "task_manifest", a generator manifest whose set tags decide the split.
/// Relative paths resolve against `base`.
inline ContestConfig contest_from_json(const Json& j, const std::filesystem::path& base = {}) {
  return rbench::detail::parse_guard("contest config", [&] {
    ContestConfig c;
    c.contest_id = j.at("contest_id").get<std::string>();
    c.policy = scoring::policy_from_json(j.at("policy"));
    c.runs_per_team = j.value("runs_per_team", 1);
    c.backends = j.value("backends", 1);
    c.stage = stage_from_string(j.value("stage", std::string("trial")));
    const auto display = j.value("display", std::string("beat_baseline"));
    if (display != "beat_baseline" && display != "all") throw Error(ErrorCode::Parse, "display must be beat_baseline|all");
    c.beat_baseline_only = display == "beat_baseline";
    const auto sel = j.value("team_selection", std::string("best"));
    if (sel != "best" && sel != "latest") throw Error(ErrorCode::Parse, "team_selection must be best|latest");
    c.selection = sel == "best" ? TeamSelection::Best : TeamSelection::Latest;
    c.max_payload_bytes = j.value("max_payload_bytes", c.max_payload_bytes);
    if (j.contains("execution")) {
      const Json& e = j.at("execution");
      c.execution.time_limit_s = e.value("time_limit_s", c.execution.time_limit_s);
      c.execution.per_action_cost_s = e.value("per_action_cost_s", c.execution.per_action_cost_s);
      if (e.contains("noise")) {
        const Json& n = e.at("noise");
        c.execution.noise = harness::Noise{n.value("grasp_fail_prob", 0.0), n.value("place_jitter_sigma_cm", 0.0),
                                           n.value("seed", std::uint64_t{0})};
      }
    }
    if (j.contains("trial_tasks")) c.trial_tasks = detail::load_task_refs(j.at("trial_tasks"), base);
    if (j.contains("contest_tasks")) c.contest_tasks = detail::load_task_refs(j.at("contest_tasks"), base);
    if (j.contains("task_manifest")) {
      const std::filesystem::path manifest_path = base / j.at("task_manifest").get<std::string>();
      const Json manifest = read_json_file(manifest_path);
      const auto dir = manifest_path.parent_path();
      for (const auto& entry : manifest.at("tasks")) {
        const auto id = entry.at("task_id").get<std::string>();
        Task t = load_task(dir / "tasks" / (id + ".json"));
        (t.set_tag == SetTag::Trial ? c.trial_tasks : c.contest_tasks).push_back(std::move(t));
      }
    }
    c.check();
    return c;
  });
}

inline ContestConfig load_contest(const std::filesystem::path& path) {
  return contest_from_json(read_json_file(path), path.parent_path());
}

// ---- payloads ----

enum class PayloadKind { Runs, Scripts };

struct TaskResult {
  std::string task_id;
  SceneConfiguration solution;
  double execution_time_s = 0.0;
  scoring::GraspStats grasp;
};

struct RunPayload {
  std::string run_id;
  int backend = 0;
  std::vector<TaskResult> results;                      ///< Runs payloads
  std::map<std::string, harness::ActionScript> scripts;  ///< Scripts payloads
};

struct Payload {
  PayloadKind kind = PayloadKind::Runs;
  std::vector<RunPayload> runs;
};

/// {"kind": "runs"|"scripts", "runs": [{"run_id", "backend", "tasks": [...]}
/// | {"run_id", "backend", "scripts": {task_id: script}}]}
inline Payload payload_from_json(const Json& j) {
  try {
    Payload p;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "runs") {
      p.kind = PayloadKind::Runs;
    } else if (kind == "scripts") {
      p.kind = PayloadKind::Scripts;
    } else {
      throw Error(ErrorCode::InvalidPayload, "kind must be runs|scripts");
    }
    for (const auto& r : j.at("runs")) {
      RunPayload run;
      run.run_id = r.at("run_id").get<std::string>();
      run.backend = r.value("backend", 0);
      if (p.kind == PayloadKind::Runs) {
        for (const auto& t : r.at("tasks")) {
          TaskResult tr;
          tr.task_id = t.at("task_id").get<std::string>();
          tr.solution = config_from_json(t.at("solution"));
          tr.execution_time_s = t.value("execution_time_s", 0.0);
          if (t.contains("grasp")) tr.grasp = scoring::grasp_from_json(t.at("grasp"));
          run.results.push_back(std::move(tr));
        }
      } else {
        for (const auto& [task_id, script] : r.at("scripts").items()) {
          run.scripts.emplace(task_id, harness::script_from_json(script));
        }
      }
      p.runs.push_back(std::move(run));
    }
    return p;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidPayload, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidPayload) throw;
    throw Error(ErrorCode::InvalidPayload, e.what());
  }
}

/// Structural checks against the contest: at least one run, backend indices
/// in range, at most runs_per_team runs per backend, unique run ids, and
/// every run covering exactly the stage's task set.
inline void check_payload(const Payload& p, const ContestConfig& contest, Stage stage) {
  if (p.runs.empty()) throw Error(ErrorCode::InvalidPayload, "payload has no runs");
  std::set<std::string> expected;
  for (const auto& t : contest.tasks_for(stage)) expected.insert(t.task_id);
  std::map<int, int> per_backend;
  std::set<std::string> run_ids;
  for (const auto& run : p.runs) {
    if (!run_ids.insert(run.run_id).second) throw Error(ErrorCode::InvalidPayload, "duplicate run_id " + run.run_id);
    if (run.backend < 0 || run.backend >= contest.backends) {
      throw Error(ErrorCode::InvalidPayload, "run " + run.run_id + " names backend " + std::to_string(run.backend));
    }
    if (++per_backend[run.backend] > contest.runs_per_team) {
      throw Error(ErrorCode::InvalidPayload, "more than " + std::to_string(contest.runs_per_team) +
                                                 " runs for backend " + std::to_string(run.backend));
    }
    std::set<std::string> got;
    std::size_t n = 0;
    if (p.kind == PayloadKind::Runs) {
      for (const auto& r : run.results) {
        got.insert(r.task_id);
        ++n;
      }
    } else {
      for (const auto& [id, s] : run.scripts) {
        got.insert(id);
        ++n;
      }
    }
    if (got != expected || n != expected.size()) {
      throw Error(ErrorCode::TaskSetMismatch, "run " + run.run_id + " does not cover exactly the " +
                                                  std::string(to_string(stage)) + " task set");
    }
  }
}

/// FNV-1a, used to turn submission ids into noise seeds.
inline std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Scores every run, keeps the best run per backend, then the better backend.
/// Scripts run through the harness; their noise seed derives from the
/// submission id, run position and task position, so evaluation is a pure
/// function of its inputs.
inline scoring::RunScore evaluate_payload(const Payload& p, const ContestConfig& contest, Stage stage,
                                          const std::string& submission_id) {
  check_payload(p, contest, stage);
  const auto& tasks = contest.tasks_for(stage);
  std::map<int, std::vector<scoring::RunScore>> by_backend;
  for (std::size_t r = 0; r < p.runs.size(); ++r) {
    const RunPayload& run = p.runs[r];
    std::vector<scoring::TaskScore> scores;
    double time = 0.0;
    scoring::GraspStats grasp;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const Task& task = tasks[t];
      if (p.kind == PayloadKind::Runs) {
        const auto it = std::find_if(run.results.begin(), run.results.end(),
                                     [&](const TaskResult& x) { return x.task_id == task.task_id; });
        scores.push_back(scoring::evaluate_task(task, it->solution, contest.policy));
        time += it->execution_time_s;
        grasp += it->grasp;
      } else {
        harness::ExecutionConfig exec = contest.execution;
        exec.time_source = harness::TimeSource::PerActionCost;
        if (exec.noise) {
          exec.noise->seed = derive_seed(exec.noise->seed ^ stable_hash(submission_id), (r << 32) | t);
        }
        const auto report = harness::execute(task, run.scripts.at(task.task_id), exec);
        scores.push_back(scoring::evaluate_task(task, report.final, contest.policy));
        time += report.elapsed_s;
        grasp += scoring::GraspStats{report.grasp_successes, report.grasp_attempts};
      }
    }
    by_backend[run.backend].push_back(scoring::make_run_score(run.run_id, std::move(scores), time, grasp));
  }
  std::optional<scoring::RunScore> best;
  for (const auto& [backend, runs] : by_backend) {
    auto b = scoring::aggregate_best_of_runs(runs);
    best = best ? scoring::aggregate_better_backend(*best, b) : b;
  }
  return *best;
}

}  // namespace rbench::service
