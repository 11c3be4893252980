#pragma once

#include <map>
#include <string>

#include "rbench/core/error.hpp"
#include "rbench/core/model.hpp"
#include "rbench/scoring/metric.hpp"

namespace rbench::scoring {

/// What happens when a solution has no pose for a task object.
enum class MissingObjects {
  Lenient,  ///< the object scores exactly its UEB
  Strict,   ///< evaluation fails with MissingObject
};

struct TaskScore {
  std::string task_id;
  std::map<InstanceId, double> per_object_error;  ///< cm, already capped
  double task_error = 0.0;                         ///< cm, mean of per_object_error
  int capped_count = 0;

  friend bool operator==(const TaskScore&, const TaskScore&) = default;
};

/// Sums min(EDE, UEB) over the task objects and divides by their count.
/// An object counts as capped when the cap was selected (EDE >= UEB) or when
/// it was missing in lenient mode.
inline TaskScore evaluate_task(const Task& task, const SceneConfiguration& solution, const UebPolicy& policy,
                               MissingObjects missing = MissingObjects::Lenient) {
  if (task.objects.empty()) throw Error(ErrorCode::EmptyInput, "task '" + task.task_id + "' has no objects");
  TaskScore score;
  score.task_id = task.task_id;
  double total = 0.0;
  for (const auto& object : task.objects) {
    const auto target = task.target.find(object.instance_id);
    if (target == task.target.end()) {
      throw Error(ErrorCode::InvalidArgument, "task target lacks '" + object.instance_id + "'");
    }
    const double cap = ueb(object.model, policy);
    double error = cap;
    const auto placed = solution.find(object.instance_id);
    if (placed == solution.end()) {
      if (missing == MissingObjects::Strict) throw Error(ErrorCode::MissingObject, object.instance_id);
      ++score.capped_count;
    } else {
      const double raw = ede(object.model, target->second, placed->second);
      if (raw >= cap) {
        ++score.capped_count;
      } else {
        error = raw;
      }
    }
    score.per_object_error[object.instance_id] = error;
    total += error;
  }
  score.task_error = total / static_cast<double>(task.objects.size());
  return score;
}

/// Default (baseline) task error: the mean of the object UEBs, i.e. the
/// largest value evaluate_task can return for this task.
inline double baseline_error(const Task& task, const UebPolicy& policy) {
  if (task.objects.empty()) throw Error(ErrorCode::EmptyInput, "task '" + task.task_id + "' has no objects");
  double total = 0.0;
  for (const auto& o : task.objects) total += ueb(o.model, policy);
  return total / static_cast<double>(task.objects.size());
}

/// Literal sum of the object UEBs. Not on the same scale as task errors;
/// kept for reporting only.
inline double baseline_error_sum(const Task& task, const UebPolicy& policy) {
  double total = 0.0;
  for (const auto& o : task.objects) total += ueb(o.model, policy);
  return total;
}

/// Signed percentage improvement of error over baseline.
inline double improvement(double error, double baseline) {
  if (!(baseline > 0.0)) throw Error(ErrorCode::NonPositiveBaseline, "baseline must be positive");
  return 100.0 * (baseline - error) / baseline;
}

/// Per-task display value: results that do not beat the baseline show as 0.0.
inline double improvement_for_display(double signed_pct) {
  return signed_pct <= 0.0 ? 0.0 : signed_pct;
}

}  // namespace rbench::scoring
