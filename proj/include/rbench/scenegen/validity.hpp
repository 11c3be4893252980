#pragma once

// Geometric scene validity: no interpenetration, every object supported,
// everything inside the workspace. Stands in for a physics-engine check.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rbench/core/model.hpp"
#include "rbench/scenegen/obb.hpp"

namespace rbench::scenegen {

inline constexpr double kMinSupportOverlap = 0.25;
inline constexpr double kMaxAdjacentGap = 5.0;
inline constexpr double kContainmentEps = 1e-9;
inline constexpr const char* kTableSupport = "table";

struct Tolerances {
  double clearance = 0.1;  ///< cm of interpenetration tolerated between boxes
  double support = 0.5;    ///< cm of vertical slack for resting contacts

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

enum class ViolationKind { Interpenetration, Unsupported, OutOfBounds, AdjacencyTooFar, UnknownModel };

inline std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::Interpenetration: return "Interpenetration";
    case ViolationKind::Unsupported: return "Unsupported";
    case ViolationKind::OutOfBounds: return "OutOfBounds";
    case ViolationKind::AdjacencyTooFar: return "AdjacencyTooFar";
    case ViolationKind::UnknownModel: return "UnknownModel";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  std::vector<InstanceId> instances;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationResult {
  std::vector<Violation> violations;
  /// instance -> "table" or the id of the object it rests on.
  std::map<InstanceId, std::string> supporters;

  bool valid() const { return violations.empty(); }

  bool has(ViolationKind kind) const {
    for (const auto& v : violations) {
      if (v.kind == kind) return true;
    }
    return false;
  }
};

using BoxMap = std::map<InstanceId, BoundingBox>;

inline BoxMap boxes_of(const Task& task) {
  BoxMap out;
  for (const auto& o : task.objects) out.emplace(o.instance_id, o.model.bbox);
  return out;
}

/// Object pair that must stay within kMaxAdjacentGap of each other.
using AdjacencyPair = std::pair<InstanceId, InstanceId>;

/// What the object rests on: the supporting object with the largest
/// footprint overlap (>= 25%), else the table, else nothing.
inline std::optional<std::string> find_supporter(const InstanceId& id, const std::map<InstanceId, OrientedBox>& world,
                                                 const Workspace& ws, const Tolerances& tol) {
  const OrientedBox& box = world.at(id);
  const double bottom = box.bottom();
  std::optional<std::string> best;
  double best_overlap = 0.0;
  for (const auto& [other_id, other] : world) {
    if (other_id == id) continue;
    if (std::abs(bottom - other.top()) > tol.support) continue;
    const double overlap = footprint_overlap_fraction(box, other);
    if (overlap >= kMinSupportOverlap && overlap > best_overlap) {
      best = other_id;
      best_overlap = overlap;
    }
  }
  if (best) return best;
  if (std::abs(bottom - ws.table_z) <= tol.support) return std::string(kTableSupport);
  return std::nullopt;
}

inline bool inside_workspace(const OrientedBox& box, const Workspace& ws, double margin = kContainmentEps) {
  for (const Vec3& v : box.vertices()) {
    for (int k = 0; k < 3; ++k) {
      if (v[k] < ws.min[k] - margin || v[k] > ws.max[k] + margin) return false;
    }
  }
  return true;
}

/// Full check of a configuration. When `focus` is set only violations that
/// involve that instance are reported.
inline ValidationResult validate_scene(const SceneConfiguration& config, const BoxMap& boxes, const Workspace& ws,
                                       const Tolerances& tol, const std::vector<AdjacencyPair>& adjacency = {},
                                       const std::optional<InstanceId>& focus = std::nullopt) {
  ValidationResult result;
  std::map<InstanceId, OrientedBox> world;
  for (const auto& [id, pose] : config) {
    auto it = boxes.find(id);
    if (it == boxes.end()) {
      result.violations.push_back({ViolationKind::UnknownModel, {id}});
      continue;
    }
    world.emplace(id, world_box(it->second, pose));
  }
  auto involved = [&](const InstanceId& id) { return !focus || *focus == id; };

  for (auto a = world.begin(); a != world.end(); ++a) {
    for (auto b = std::next(a); b != world.end(); ++b) {
      if (!involved(a->first) && !involved(b->first)) continue;
      if (sat_overlap(a->second, b->second) > tol.clearance) {
        result.violations.push_back({ViolationKind::Interpenetration, {a->first, b->first}});
      }
    }
  }
  for (const auto& [id, box] : world) {
    if (!involved(id)) continue;
    if (auto s = find_supporter(id, world, ws, tol)) {
      result.supporters[id] = *s;
    } else {
      result.violations.push_back({ViolationKind::Unsupported, {id}});
    }
    if (!inside_workspace(box, ws)) result.violations.push_back({ViolationKind::OutOfBounds, {id}});
  }
  for (const auto& [p, c] : adjacency) {
    if (!involved(p) && !involved(c)) continue;
    auto pa = world.find(p);
    auto ca = world.find(c);
    if (pa == world.end() || ca == world.end()) continue;
    if (-sat_overlap(pa->second, ca->second) > kMaxAdjacentGap) {
      result.violations.push_back({ViolationKind::AdjacencyTooFar, {p, c}});
    }
  }
  return result;
}

inline ValidationResult validate_scene(const SceneConfiguration& config, const Task& task, const Tolerances& tol) {
  return validate_scene(config, boxes_of(task), task.workspace_or_default(), tol);
}

}  // namespace rbench::scenegen
