#pragma once

// JSON encodings of the core types and the task / object-database files.
// Rotations are stored as unit quaternions (x, y, z, w); numbers are written
// in shortest round-trip form.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rbench/core/error.hpp"
#include "rbench/core/geometry.hpp"
#include "rbench/core/model.hpp"

namespace rbench {

using Json = nlohmann::json;

inline constexpr const char* kTaskSchemaVersion = "1";

namespace detail {

inline double finite_number(const Json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorCode::Parse, std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, std::string(what) + " is not finite");
  return v;
}

template <typename Fn>
auto parse_guard(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, std::string(what) + ": " + e.what());
  }
}

}  // namespace detail

inline Json vec3_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3_from_json(const Json& j, const char* what = "vector") {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::Parse, std::string(what) + " must be [x, y, z]");
  return {detail::finite_number(j[0], what), detail::finite_number(j[1], what),
          detail::finite_number(j[2], what)};
}

inline Json pose_to_json(const Pose& pose) {
  const QuaternionXyzw q = pose.rotation.to_quaternion();
  return Json{{"position", vec3_to_json(pose.translation)},
              {"orientation_xyzw", Json::array({q.x, q.y, q.z, q.w})}};
}

inline Pose pose_from_json(const Json& j) {
  return detail::parse_guard("pose", [&] {
    const Vec3 t = vec3_from_json(j.at("position"), "position");
    const Json& q = j.at("orientation_xyzw");
    if (!q.is_array() || q.size() != 4) throw Error(ErrorCode::Parse, "orientation_xyzw must have 4 entries");
    QuaternionXyzw quat{detail::finite_number(q[0], "orientation"), detail::finite_number(q[1], "orientation"),
                        detail::finite_number(q[2], "orientation"), detail::finite_number(q[3], "orientation")};
    return Pose{Rotation::from_quaternion(quat), t};
  });
}

inline Json config_to_json(const SceneConfiguration& config) {
  Json out = Json::object();
  for (const auto& [id, pose] : config) out[id] = pose_to_json(pose);
  return out;
}

inline SceneConfiguration config_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "scene configuration must be an object");
  SceneConfiguration out;
  for (const auto& [id, pose] : j.items()) out.emplace(id, pose_from_json(pose));
  return out;
}

inline Json bbox_to_json(const BoundingBox& b) {
  return Json{{"l", b.length}, {"w", b.width}, {"h", b.height}};
}

inline BoundingBox bbox_from_json(const Json& j) {
  return detail::parse_guard("bbox", [&] {
    return BoundingBox::make(detail::finite_number(j.at("l"), "bbox.l"), detail::finite_number(j.at("w"), "bbox.w"),
                             detail::finite_number(j.at("h"), "bbox.h"));
  });
}

inline Json workspace_to_json(const Workspace& w) {
  return Json{{"min", vec3_to_json(w.min)}, {"max", vec3_to_json(w.max)}, {"table_z", w.table_z}};
}

inline Workspace workspace_from_json(const Json& j) {
  return detail::parse_guard("workspace", [&] {
    return Workspace::make(vec3_from_json(j.at("min"), "workspace.min"), vec3_from_json(j.at("max"), "workspace.max"),
                           detail::finite_number(j.at("table_z"), "workspace.table_z"));
  });
}

inline Json model_to_json(const ObjectModel& m) {
  Json j{{"model_id", m.model_id},
         {"category", m.category},
         {"bbox", bbox_to_json(m.bbox)},
         {"set_tag", std::string(to_string(m.set_tag))}};
  if (m.mesh_ref) j["mesh_ref"] = *m.mesh_ref;
  return j;
}

inline ObjectModel model_from_json(const Json& j) {
  return detail::parse_guard("object model", [&] {
    ObjectModel m;
    m.model_id = j.at("model_id").get<std::string>();
    m.category = j.at("category").get<std::string>();
    m.bbox = bbox_from_json(j.at("bbox"));
    m.set_tag = parse_set_tag(j.value("set_tag", std::string("trial")));
    if (j.contains("mesh_ref")) m.mesh_ref = j.at("mesh_ref").get<std::string>();
    return m;
  });
}

inline Json database_to_json(const ObjectDatabase& db) {
  Json models = Json::array();
  for (const auto& m : db.models()) models.push_back(model_to_json(m));
  return Json{{"models", models}};
}

inline ObjectDatabase database_from_json(const Json& j) {
  return detail::parse_guard("object database", [&] {
    ObjectDatabase db;
    for (const auto& m : j.at("models")) db.add(model_from_json(m));
    return db;
  });
}

/// Task objects carry the resolved model (id, category, bbox); the model's
/// set tag and mesh ref stay in the database.
inline Json task_to_json(const Task& task) {
  Json objects = Json::array();
  for (const auto& o : task.objects) {
    objects.push_back(Json{{"instance_id", o.instance_id},
                           {"model_id", o.model.model_id},
                           {"bbox", bbox_to_json(o.model.bbox)},
                           {"category", o.model.category}});
  }
  Json j{{"schema_version", kTaskSchemaVersion},
         {"task_id", task.task_id},
         {"set_tag", std::string(to_string(task.set_tag))},
         {"objects", objects},
         {"initial", config_to_json(task.initial)},
         {"target", config_to_json(task.target)}};
  if (task.workspace) j["workspace"] = workspace_to_json(*task.workspace);
  return j;
}

inline Task task_from_json(const Json& j) {
  return detail::parse_guard("task", [&] {
    const auto version = j.at("schema_version").get<std::string>();
    if (version != kTaskSchemaVersion) {
      throw Error(ErrorCode::Parse, "unsupported task schema_version '" + version + "'");
    }
    Task task;
    task.task_id = j.at("task_id").get<std::string>();
    task.set_tag = parse_set_tag(j.at("set_tag").get<std::string>());
    for (const auto& o : j.at("objects")) {
      ObjectInstance inst;
      inst.instance_id = o.at("instance_id").get<std::string>();
      inst.model.model_id = o.at("model_id").get<std::string>();
      inst.model.category = o.value("category", std::string());
      inst.model.bbox = bbox_from_json(o.at("bbox"));
      task.objects.push_back(std::move(inst));
    }
    task.initial = config_from_json(j.at("initial"));
    task.target = config_from_json(j.at("target"));
    if (j.contains("workspace")) task.workspace = workspace_from_json(j.at("workspace"));
    task.check_invariants();
    return task;
  });
}

// ---- files ----

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write to '" + path.string() + "' failed");
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Parse, origin + ": " + e.what());
  }
}

inline Json read_json_file(const std::filesystem::path& path) {
  return parse_json_text(read_text_file(path), path.string());
}

/// Canonical on-disk form: 2-space indent, trailing newline.
inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

inline void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, dump_json(j)); }

inline Task load_task(const std::filesystem::path& path) { return task_from_json(read_json_file(path)); }
inline ObjectDatabase load_database(const std::filesystem::path& path) {
  return database_from_json(read_json_file(path));
}

}  // namespace rbench
