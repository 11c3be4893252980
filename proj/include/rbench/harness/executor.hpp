#pragma once

// Kinematic pick-and-place world. Objects teleport: a successful Pick lifts
// the object out of the scene, a Place puts it down at the requested pose if
// the result is geometrically valid.
//
// Randomness (only when noise is configured): every processed Pick consumes
// one uniform draw, every processed Place consumes two normal draws (four
// uniforms), in action order, whatever the outcome.

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "rbench/harness/action_script.hpp"
#include "rbench/scenegen/validity.hpp"
#include "rbench/util/random.hpp"

namespace rbench::harness {

inline constexpr double kHazardMarginCm = 10.0;

struct Noise {
  double grasp_fail_prob = 0.0;
  double place_jitter_sigma_cm = 0.0;
  std::uint64_t seed = 0;
};

enum class TimeSource {
  PerActionCost,  ///< elapsed = per_action_cost_s * processed actions
  WallClock,      ///< elapsed measured with a steady clock (live use)
};

struct ExecutionConfig {
  double time_limit_s = 600.0;
  double per_action_cost_s = 15.0;
  std::optional<Noise> noise;
  scenegen::Tolerances tol;
  TimeSource time_source = TimeSource::PerActionCost;

  void check() const {
    if (!(time_limit_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "time limit must be positive");
    if (per_action_cost_s < 0.0) throw Error(ErrorCode::InvalidArgument, "action cost must be >= 0");
    if (noise && !(noise->grasp_fail_prob >= 0.0 && noise->grasp_fail_prob <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "grasp_fail_prob must be in [0, 1]");
    }
    if (noise && noise->place_jitter_sigma_cm < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "place jitter sigma must be >= 0");
    }
  }
};

enum class Termination { Completed, TimeLimit, Hazard };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Completed: return "completed";
    case Termination::TimeLimit: return "time_limit";
    case Termination::Hazard: return "hazard";
  }
  return "?";
}

inline Termination termination_from_string(const std::string& s) {
  if (s == "completed") return Termination::Completed;
  if (s == "time_limit") return Termination::TimeLimit;
  if (s == "hazard") return Termination::Hazard;
  throw Error(ErrorCode::Parse, "unknown termination '" + s + "'");
}

struct LogEntry {
  std::size_t index = 0;
  std::string op;
  InstanceId id;
  bool ok = false;
  std::string detail;
  std::vector<double> draws;

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

struct ExecutionReport {
  SceneConfiguration final;
  double elapsed_s = 0.0;
  int grasp_attempts = 0;
  int grasp_successes = 0;
  Termination terminated = Termination::Completed;
  std::vector<LogEntry> action_log;
};

namespace detail {

/// Ids of objects resting on `id`: bottom within tolerance of its top and at
/// least the minimum footprint overlap.
inline std::vector<InstanceId> objects_on(const InstanceId& id, const SceneConfiguration& world,
                                          const scenegen::BoxMap& boxes, const scenegen::Tolerances& tol) {
  std::vector<InstanceId> out;
  const auto below = scenegen::world_box(boxes.at(id), world.at(id));
  for (const auto& [other, pose] : world) {
    if (other == id) continue;
    const auto above = scenegen::world_box(boxes.at(other), pose);
    if (std::abs(above.bottom() - below.top()) <= tol.support &&
        scenegen::footprint_overlap_fraction(above, below) >= scenegen::kMinSupportOverlap) {
      out.push_back(other);
    }
  }
  return out;
}

inline std::string describe(const scenegen::ValidationResult& r) {
  std::string out;
  for (const auto& v : r.violations) {
    if (!out.empty()) out += "; ";
    out += std::string(scenegen::to_string(v.kind));
    for (const auto& id : v.instances) out += " " + id;
  }
  return out;
}

}  // namespace detail

/// Runs the script against the task's initial scene. Actions are charged
/// before they take effect; an action whose charge would push elapsed time
/// past the limit is not processed and the run ends with TimeLimit. Objects
/// still held at the end return to their pre-pick pose.
inline ExecutionReport execute(const Task& task, const ActionScript& script, const ExecutionConfig& cfg) {
  cfg.check();
  check_well_formed(script);
  for (const auto& a : script.actions) {
    if (!task.find_object(action_id(a))) throw Error(ErrorCode::UnknownInstance, action_id(a));
  }

  const scenegen::BoxMap boxes = scenegen::boxes_of(task);
  const Workspace ws = task.workspace_or_default();
  std::optional<Rng> rng;
  if (cfg.noise) rng.emplace(cfg.noise->seed);

  ExecutionReport report;
  SceneConfiguration world = task.initial;
  std::map<InstanceId, Pose> held;  // id -> pose before the pick
  const auto start = std::chrono::steady_clock::now();
  auto wall_elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  for (std::size_t i = 0; i < script.actions.size(); ++i) {
    if (cfg.time_source == TimeSource::PerActionCost) {
      if (report.elapsed_s + cfg.per_action_cost_s > cfg.time_limit_s) {
        report.terminated = Termination::TimeLimit;
        break;
      }
      report.elapsed_s += cfg.per_action_cost_s;
    } else if (wall_elapsed() > cfg.time_limit_s) {
      report.terminated = Termination::TimeLimit;
      break;
    }

    LogEntry entry;
    entry.index = i;
    entry.id = action_id(script.actions[i]);

    if (const auto* pick = std::get_if<Pick>(&script.actions[i])) {
      entry.op = "pick";
      ++report.grasp_attempts;
      double draw = 1.0;
      if (rng) {
        draw = rng->uniform();
        entry.draws.push_back(draw);
      }
      const auto blockers = detail::objects_on(pick->id, world, boxes, cfg.tol);
      if (!blockers.empty()) {
        entry.detail = "blocked by " + blockers.front();
      } else if (cfg.noise && draw < cfg.noise->grasp_fail_prob) {
        entry.detail = "grasp failed";
      } else {
        held.emplace(pick->id, world.at(pick->id));
        world.erase(pick->id);
        ++report.grasp_successes;
        entry.ok = true;
      }
    } else {
      const auto& place = std::get<Place>(script.actions[i]);
      entry.op = "place";
      Pose target = place.pose;
      if (rng) {
        const double jx = rng->normal() * cfg.noise->place_jitter_sigma_cm;
        const double jy = rng->normal() * cfg.noise->place_jitter_sigma_cm;
        entry.draws = {jx, jy};
        target.translation += Vec3(jx, jy, 0.0);
      }
      auto h = held.find(place.id);
      if (h == held.end()) {
        entry.detail = "not held";
      } else {
        const Pose pre_pick = h->second;
        held.erase(h);
        const auto box = scenegen::world_box(boxes.at(place.id), target);
        if (!scenegen::inside_workspace(box, ws, kHazardMarginCm)) {
          world[place.id] = pre_pick;
          entry.detail = "hazard: placement leaves the workspace by more than 10 cm";
          report.action_log.push_back(std::move(entry));
          report.terminated = Termination::Hazard;
          break;
        }
        SceneConfiguration trial = world;
        trial[place.id] = target;
        const auto check = scenegen::validate_scene(trial, boxes, ws, cfg.tol, {}, place.id);
        if (check.valid()) {
          world = std::move(trial);
          entry.ok = true;
        } else {
          world[place.id] = pre_pick;
          entry.detail = detail::describe(check);
        }
      }
    }
    report.action_log.push_back(std::move(entry));
  }
  if (cfg.time_source == TimeSource::WallClock) report.elapsed_s = wall_elapsed();
  for (const auto& [id, pose] : held) world[id] = pose;
  report.final = std::move(world);
  return report;
}

/// execute() with the noise stream pinned to `seed`. Equal inputs give equal
/// reports on every platform.
inline ExecutionReport replay_deterministic(const Task& task, const ActionScript& script, ExecutionConfig cfg,
                                            std::uint64_t seed) {
  if (cfg.time_source == TimeSource::WallClock) {
    throw Error(ErrorCode::InvalidArgument, "deterministic replay needs the per-action time source");
  }
  if (cfg.noise) cfg.noise->seed = seed;
  return execute(task, script, cfg);
}

/// A script that moves every object to its target pose: pick everything top
/// down from the initial scene, then place bottom up in the target scene.
inline ActionScript make_reference_script(const Task& task, const scenegen::Tolerances& tol = {}) {
  const auto boxes = scenegen::boxes_of(task);
  const auto ws = task.workspace_or_default();
  auto support_order = [&](const SceneConfiguration& config) {
    const auto supporters = scenegen::validate_scene(config, boxes, ws, tol).supporters;
    std::vector<InstanceId> order;
    std::set<InstanceId> done;
    while (order.size() < config.size()) {
      const std::size_t before = order.size();
      for (const auto& [id, pose] : config) {
        if (done.count(id)) continue;
        auto s = supporters.find(id);
        if (s == supporters.end() || s->second == scenegen::kTableSupport || done.count(s->second)) {
          order.push_back(id);
          done.insert(id);
        }
      }
      if (order.size() == before) {  // support cycle; fall back to id order
        for (const auto& [id, pose] : config) {
          if (done.insert(id).second) order.push_back(id);
        }
      }
    }
    return order;
  };
  ActionScript script;
  auto picks = support_order(task.initial);
  for (auto it = picks.rbegin(); it != picks.rend(); ++it) script.actions.emplace_back(Pick{*it});
  for (const auto& id : support_order(task.target)) script.actions.emplace_back(Place{id, task.target.at(id)});
  return script;
}

inline Json report_to_json(const ExecutionReport& r) {
  Json log = Json::array();
  for (const auto& e : r.action_log) {
    log.push_back(Json{{"index", e.index}, {"op", e.op}, {"id", e.id}, {"ok", e.ok}, {"detail", e.detail},
                       {"draws", e.draws}});
  }
  return Json{{"final", config_to_json(r.final)},
              {"elapsed_s", r.elapsed_s},
              {"grasp_attempts", r.grasp_attempts},
              {"grasp_successes", r.grasp_successes},
              {"terminated", std::string(to_string(r.terminated))},
              {"action_log", log}};
}

inline ExecutionReport report_from_json(const Json& j) {
  return rbench::detail::parse_guard("execution report", [&] {
    ExecutionReport r;
    r.final = config_from_json(j.at("final"));
    r.elapsed_s = j.at("elapsed_s").get<double>();
    r.grasp_attempts = j.at("grasp_attempts").get<int>();
    r.grasp_successes = j.at("grasp_successes").get<int>();
    r.terminated = termination_from_string(j.at("terminated").get<std::string>());
    if (j.contains("action_log")) {
      for (const auto& e : j.at("action_log")) {
        r.action_log.push_back({e.at("index").get<std::size_t>(), e.at("op").get<std::string>(),
                                e.at("id").get<std::string>(), e.at("ok").get<bool>(),
                                e.at("detail").get<std::string>(), e.at("draws").get<std::vector<double>>()});
      }
    }
    return r;
  });
}

}  // namespace rbench::harness
