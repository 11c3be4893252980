#pragma once

// Task generation: bind slots to database models, instantiate poses along the
// scene graph, and rejection-sample until both scenes are valid.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "rbench/scenegen/scene_graph.hpp"
#include "rbench/scenegen/validity.hpp"
#include "rbench/util/random.hpp"

namespace rbench::scenegen {

inline constexpr double kMaxAdjacentPlacementGap = 2.0;

struct GenerationConfig {
  std::uint64_t seed = 0;
  int max_rejections = 100;
  Tolerances tol;
  SetTag set_tag = SetTag::Trial;

  void check() const {
    if (max_rejections < 1) throw Error(ErrorCode::InvalidArgument, "max_rejections must be >= 1");
    if (tol.clearance < 0.0 || tol.support < 0.0) throw Error(ErrorCode::InvalidArgument, "tolerances must be >= 0");
  }
};

using Assignment = std::map<std::string, ObjectModel>;

/// Binds every slot to a model drawn uniformly from the database models that
/// match its filter (explicit model id or category). One draw per slot, in
/// node order.
inline Assignment sample_objects(const SceneGraph& graph, const ObjectDatabase& db, Rng& rng) {
  Assignment out;
  for (const auto& node : graph.nodes) {
    std::vector<const ObjectModel*> candidates;
    for (const auto& m : db.models()) {
      if (node.model_ids.count(m.model_id) || node.categories.count(m.category)) candidates.push_back(&m);
    }
    if (candidates.empty()) throw Error(ErrorCode::EmptyCandidateSet, node.slot_id);
    out.emplace(node.slot_id, *candidates[rng.index(candidates.size())]);
  }
  return out;
}

inline Pose sample_jitter(const Jitter& j, Rng& rng) {
  const double dx = rng.symmetric(j.pos_range.x());
  const double dy = rng.symmetric(j.pos_range.y());
  const double dz = rng.symmetric(j.pos_range.z());
  const double yaw = rng.symmetric(deg_to_rad(j.yaw_range_deg));
  return {Rotation::about_z(yaw), Vec3(dx, dy, dz)};
}

/// Places slots in topological order. Roots: anchor ∘ jitter, lowered or
/// raised so the box bottom touches the table. On-top-of children:
/// parent ∘ offset ∘ jitter with the bottom set on the parent's top.
/// Adjacent-to children: parent ∘ offset ∘ jitter, then slid along the
/// horizontal offset direction to a gap in [0, 2] cm from the parent and set
/// on the parent's supporting level.
inline SceneConfiguration instantiate_poses(const SceneGraph& graph, const Assignment& assignment,
                                            const Workspace& ws, Rng& rng) {
  SceneConfiguration config;
  std::map<std::string, OrientedBox> placed;
  auto box_for = [&](const std::string& slot, const Pose& pose) {
    auto it = assignment.find(slot);
    if (it == assignment.end()) throw Error(ErrorCode::InvalidArgument, "no model assigned to slot '" + slot + "'");
    return world_box(it->second.bbox, pose);
  };
  auto lift = [](Pose& pose, OrientedBox& box, double dz) {
    pose.translation.z() += dz;
    box.center.z() += dz;
  };

  for (const auto& slot : graph.topological_order()) {
    const SlotNode& node = *graph.find(slot);
    const Edge* edge = graph.parent_edge(slot);
    Pose pose;
    OrientedBox box;
    if (!edge) {
      pose = node.anchor * sample_jitter(node.jitter, rng);
      box = box_for(slot, pose);
      lift(pose, box, ws.table_z - box.bottom());
    } else {
      const Pose& parent_pose = config.at(edge->parent);
      const OrientedBox& parent_box = placed.at(edge->parent);
      pose = parent_pose * edge->offset * sample_jitter(edge->jitter, rng);
      box = box_for(slot, pose);
      if (edge->relation == Relation::OnTopOf) {
        lift(pose, box, parent_box.top() - box.bottom());
      } else {
        Vec3 dir = parent_pose.rotation * edge->offset.translation;
        dir.z() = 0.0;
        if (dir.norm() < 1e-9) {
          dir = parent_pose.rotation.matrix().col(0);
          dir.z() = 0.0;
        }
        if (dir.norm() < 1e-9) dir = Vec3::UnitX();
        dir.normalize();
        const double gap = rng.uniform(0.0, kMaxAdjacentPlacementGap);
        const double shift = parent_box.max_along(dir) + gap - box.min_along(dir);
        pose.translation += shift * dir;
        box.center += shift * dir;
        lift(pose, box, parent_box.bottom() - box.bottom());
      }
    }
    config.emplace(slot, pose);
    placed.emplace(slot, box);
  }
  return config;
}

inline std::vector<AdjacencyPair> adjacency_pairs(const SceneGraph& graph) {
  std::vector<AdjacencyPair> out;
  for (const auto& e : graph.edges) {
    if (e.relation == Relation::AdjacentTo) out.emplace_back(e.parent, e.child);
  }
  return out;
}

struct GeneratedTask {
  Task task;
  std::string template_id;
  std::uint64_t seed = 0;
  int rejections_used = 0;
};

/// Rejection-samples (assignment, initial scene, target scene) until both
/// scenes are valid. Slots become instance ids.
inline GeneratedTask generate_task(const SceneGraph& initial_graph, const SceneGraph& target_graph,
                                   const ObjectDatabase& db, const Workspace& ws, const GenerationConfig& cfg,
                                   std::string task_id = "task") {
  cfg.check();
  if (initial_graph.slot_ids() != target_graph.slot_ids()) {
    throw Error(ErrorCode::InvalidTemplate, "initial and target graphs must share the same slot set");
  }
  const auto initial_adj = adjacency_pairs(initial_graph);
  const auto target_adj = adjacency_pairs(target_graph);
  Rng rng(cfg.seed);
  for (int attempt = 0; attempt < cfg.max_rejections; ++attempt) {
    const Assignment assignment = sample_objects(initial_graph, db, rng);
    SceneConfiguration initial = instantiate_poses(initial_graph, assignment, ws, rng);
    SceneConfiguration target = instantiate_poses(target_graph, assignment, ws, rng);
    BoxMap boxes;
    for (const auto& [slot, model] : assignment) boxes.emplace(slot, model.bbox);
    if (!validate_scene(initial, boxes, ws, cfg.tol, initial_adj).valid()) continue;
    if (!validate_scene(target, boxes, ws, cfg.tol, target_adj).valid()) continue;

    GeneratedTask out;
    out.task.task_id = std::move(task_id);
    out.task.set_tag = cfg.set_tag;
    for (const auto& node : initial_graph.nodes) out.task.objects.push_back({node.slot_id, assignment.at(node.slot_id)});
    out.task.initial = std::move(initial);
    out.task.target = std::move(target);
    out.task.workspace = ws;
    out.seed = cfg.seed;
    out.rejections_used = attempt;
    return out;
  }
  throw Error(ErrorCode::GenerationExhausted,
              "no valid scene pair within " + std::to_string(cfg.max_rejections) + " attempts");
}

struct BatchItem {
  SceneTemplate tmpl;
  int count = 0;
};

struct TaskSet {
  std::uint64_t seed = 0;
  std::vector<GeneratedTask> tasks;

  /// {seed, tasks: [{task_id, template_id, seed, rejections_used, set_tag}]}
  Json manifest() const {
    Json entries = Json::array();
    for (const auto& t : tasks) {
      entries.push_back(Json{{"task_id", t.task.task_id},
                             {"template_id", t.template_id},
                             {"seed", t.seed},
                             {"rejections_used", t.rejections_used},
                             {"set_tag", std::string(to_string(t.task.set_tag))}});
    }
    return Json{{"seed", seed}, {"tasks", entries}};
  }
};

/// Number of trial tasks for a set of n: n * fraction rounded half up.
inline std::size_t trial_count(std::size_t n, double trial_fraction) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * trial_fraction + 0.5));
}

/// Generates `count` tasks per template. Task k (global index over all
/// templates) uses seed splitmix64(seed ^ k) and id "<template_id>_<k:04>".
/// A seeded shuffle then marks round(n * trial_fraction) tasks as trial and
/// the rest as contest. `jobs` worker threads may be used; the result does
/// not depend on it.
inline TaskSet generate_batch(const std::vector<BatchItem>& items, const ObjectDatabase& db,
                              const Workspace& default_ws, const GenerationConfig& cfg, double trial_fraction = 1.0,
                              unsigned jobs = 1) {
  cfg.check();
  if (!(trial_fraction >= 0.0 && trial_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "trial fraction must be in [0, 1]");
  }
  struct Job {
    std::size_t item;
    std::uint64_t index;
  };
  std::vector<Job> work;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].count < 0) throw Error(ErrorCode::InvalidArgument, "counts must be >= 0");
    for (int c = 0; c < items[i].count; ++c) work.push_back({i, work.size()});
  }

  TaskSet set;
  set.seed = cfg.seed;
  set.tasks.resize(work.size());
  std::vector<std::exception_ptr> errors(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < work.size(); k = next++) {
      const BatchItem& item = items[work[k].item];
      GenerationConfig task_cfg = cfg;
      task_cfg.seed = derive_seed(cfg.seed, work[k].index);
      char id[32];
      std::snprintf(id, sizeof id, "_%04llu", static_cast<unsigned long long>(work[k].index));
      try {
        set.tasks[k] = generate_task(item.tmpl.initial, item.tmpl.target_graph(), db,
                                     item.tmpl.workspace.value_or(default_ws), task_cfg, item.tmpl.template_id + id);
        set.tasks[k].template_id = item.tmpl.template_id;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::GenerationExhausted) {
          errors[k] = std::make_exception_ptr(Error(ErrorCode::GenerationExhausted,
                                                    "template #" + std::to_string(work[k].item) + " ('" +
                                                        item.tmpl.template_id + "'): " + e.what()));
        } else {
          errors[k] = std::current_exception();
        }
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(work.size())));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Seeded Fisher-Yates over task positions; the first n_trial become trial.
  std::vector<std::size_t> perm(set.tasks.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  Rng split_rng(derive_seed(cfg.seed, ~std::uint64_t{0}));
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[split_rng.index(i)]);
  const std::size_t n_trial = trial_count(perm.size(), trial_fraction);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    set.tasks[perm[i]].task.set_tag = i < n_trial ? SetTag::Trial : SetTag::Contest;
  }
  return set;
}

}  // namespace rbench::scenegen
