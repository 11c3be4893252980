#pragma once

// Score-report file: {team_id, run_id, policy, tasks: [...], average_error,
// total_execution_time_s, grasp: {successes, attempts}}.

#include <string>

#include "rbench/core/json_io.hpp"
#include "rbench/scoring/ranking.hpp"

namespace rbench::scoring {

inline Json policy_to_json(const UebPolicy& p) {
  Json j{{"variant", p.name()}};
  if (p.variant == UebPolicy::Variant::Constant) j["constant_value"] = p.constant_value;
  return j;
}

inline UebPolicy policy_from_json(const Json& j) {
  return rbench::detail::parse_guard("policy", [&] {
    const auto variant = j.at("variant").get<std::string>();
    if (variant == "size_based") return UebPolicy::size_based();
    if (variant == "constant") {
      if (!j.contains("constant_value")) {
        throw Error(ErrorCode::InvalidArgument, "constant policy requires constant_value");
      }
      return UebPolicy::constant(j.at("constant_value").get<double>());
    }
    throw Error(ErrorCode::Parse, "unknown policy variant '" + variant + "'");
  });
}

inline Json task_score_to_json(const TaskScore& s) {
  Json per = Json::object();
  for (const auto& [id, err] : s.per_object_error) per[id] = err;
  return Json{{"task_id", s.task_id},
              {"per_object_error", per},
              {"task_error", s.task_error},
              {"capped_count", s.capped_count}};
}

inline TaskScore task_score_from_json(const Json& j) {
  return rbench::detail::parse_guard("task score", [&] {
    TaskScore s;
    s.task_id = j.at("task_id").get<std::string>();
    for (const auto& [id, err] : j.at("per_object_error").items()) s.per_object_error[id] = err.get<double>();
    s.task_error = j.at("task_error").get<double>();
    s.capped_count = j.at("capped_count").get<int>();
    return s;
  });
}

inline Json grasp_to_json(const GraspStats& g) { return Json{{"successes", g.successes}, {"attempts", g.attempts}}; }

inline GraspStats grasp_from_json(const Json& j) {
  return rbench::detail::parse_guard("grasp", [&] {
    GraspStats g{j.at("successes").get<int>(), j.at("attempts").get<int>()};
    grasp_success_rate(g.successes, g.attempts);  // validates counts
    return g;
  });
}

inline Json run_score_to_json(const RunScore& run) {
  Json tasks = Json::array();
  for (const auto& t : run.task_scores) tasks.push_back(task_score_to_json(t));
  return Json{{"run_id", run.run_id},
              {"tasks", tasks},
              {"average_error", run.average_error},
              {"total_execution_time_s", run.total_execution_time_s},
              {"grasp", grasp_to_json(run.grasp)}};
}

inline RunScore run_score_from_json(const Json& j) {
  return rbench::detail::parse_guard("run score", [&] {
    RunScore run;
    run.run_id = j.value("run_id", std::string());
    for (const auto& t : j.at("tasks")) run.task_scores.push_back(task_score_from_json(t));
    run.average_error = j.at("average_error").get<double>();
    run.total_execution_time_s = j.at("total_execution_time_s").get<double>();
    run.grasp = grasp_from_json(j.at("grasp"));
    return run;
  });
}

struct ScoreReport {
  std::string team_id;
  UebPolicy policy;
  RunScore run;
};

inline Json score_report_to_json(const ScoreReport& r) {
  Json j = run_score_to_json(r.run);
  j["team_id"] = r.team_id;
  j["policy"] = policy_to_json(r.policy);
  return j;
}

inline ScoreReport score_report_from_json(const Json& j) {
  return rbench::detail::parse_guard("score report", [&] {
    return ScoreReport{j.at("team_id").get<std::string>(), policy_from_json(j.at("policy")), run_score_from_json(j)};
  });
}

}  // namespace rbench::scoring
