#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rbench/core/error.hpp"
#include "rbench/core/geometry.hpp"

namespace rbench {

enum class SetTag { Trial, Contest };

inline std::string_view to_string(SetTag tag) { return tag == SetTag::Trial ? "trial" : "contest"; }

inline SetTag parse_set_tag(std::string_view s) {
  if (s == "trial") return SetTag::Trial;
  if (s == "contest") return SetTag::Contest;
  throw Error(ErrorCode::Parse, "unknown set_tag '" + std::string(s) + "'");
}

struct ObjectModel {
  std::string model_id;
  std::string category;
  BoundingBox bbox;
  std::optional<std::string> mesh_ref;
  SetTag set_tag = SetTag::Trial;

  friend bool operator==(const ObjectModel&, const ObjectModel&) = default;
};

class ObjectDatabase {
 public:
  ObjectDatabase() = default;

  explicit ObjectDatabase(std::vector<ObjectModel> models) {
    for (auto& m : models) add(std::move(m));
  }

  void add(ObjectModel model) {
    if (find(model.model_id)) {
      throw Error(ErrorCode::InvalidArgument, "duplicate model_id '" + model.model_id + "'");
    }
    models_.push_back(std::move(model));
  }

  const ObjectModel* find(std::string_view model_id) const {
    auto it = std::find_if(models_.begin(), models_.end(),
                           [&](const ObjectModel& m) { return m.model_id == model_id; });
    return it == models_.end() ? nullptr : &*it;
  }

  const std::vector<ObjectModel>& models() const { return models_; }

 private:
  std::vector<ObjectModel> models_;
};

/// One placed object of a task, with its model resolved.
struct ObjectInstance {
  std::string instance_id;
  ObjectModel model;

  friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

using InstanceId = std::string;

/// instance_id -> pose. Ordered so iteration and serialization are deterministic.
using SceneConfiguration = std::map<InstanceId, Pose>;

/// Axis-aligned tabletop volume. The table surface is the plane z = table_z.
struct Workspace {
  Vec3 min{-60.0, -40.0, 0.0};
  Vec3 max{60.0, 40.0, 60.0};
  double table_z = 0.0;

  static Workspace make(const Vec3& lo, const Vec3& hi, double table_z) {
    if (!lo.allFinite() || !hi.allFinite() || !std::isfinite(table_z)) {
      throw Error(ErrorCode::NonFinite, "workspace bounds must be finite");
    }
    if (!((hi - lo).array() > 0.0).all()) {
      throw Error(ErrorCode::InvalidArgument, "workspace extents must be positive");
    }
    if (table_z < lo.z() || table_z >= hi.z()) {
      throw Error(ErrorCode::InvalidArgument, "table surface must lie inside the workspace");
    }
    return {lo, hi, table_z};
  }

  friend bool operator==(const Workspace&, const Workspace&) = default;
};

struct Task {
  std::string task_id;
  SetTag set_tag = SetTag::Trial;
  std::vector<ObjectInstance> objects;
  SceneConfiguration initial;
  SceneConfiguration target;
  std::optional<Workspace> workspace;

  const ObjectInstance* find_object(std::string_view instance_id) const {
    auto it = std::find_if(objects.begin(), objects.end(),
                           [&](const ObjectInstance& o) { return o.instance_id == instance_id; });
    return it == objects.end() ? nullptr : &*it;
  }

  Workspace workspace_or_default() const { return workspace.value_or(Workspace{}); }

  /// Throws InvalidArgument unless initial and target cover exactly the
  /// (unique) instance ids of objects and there is at least one object.
  void check_invariants() const {
    if (objects.empty()) throw Error(ErrorCode::InvalidArgument, "task '" + task_id + "' has no objects");
    std::set<std::string> ids;
    for (const auto& o : objects) {
      if (!ids.insert(o.instance_id).second) {
        throw Error(ErrorCode::InvalidArgument, "duplicate instance_id '" + o.instance_id + "'");
      }
    }
    auto covers = [&](const SceneConfiguration& c, std::string_view which) {
      if (c.size() != ids.size()) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string(which) + " configuration does not cover the object set");
      }
      for (const auto& [id, pose] : c) {
        if (!ids.count(id)) {
          throw Error(ErrorCode::InvalidArgument,
                      std::string(which) + " configuration names unknown instance '" + id + "'");
        }
      }
    };
    covers(initial, "initial");
    covers(target, "target");
  }
};

}  // namespace rbench
