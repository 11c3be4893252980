#pragma once

// Scene-graph templates: object slots plus on-top-of / adjacent-to relations.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rbench/core/json_io.hpp"

namespace rbench::scenegen {

enum class Relation { OnTopOf, AdjacentTo };

inline std::string_view to_string(Relation r) { return r == Relation::OnTopOf ? "on_top_of" : "adjacent_to"; }

/// Uniform perturbation: each position component in [-pos_range, pos_range],
/// yaw in [-yaw_range_deg, yaw_range_deg].
struct Jitter {
  Vec3 pos_range = Vec3::Zero();
  double yaw_range_deg = 0.0;
};

struct SlotNode {
  std::string slot_id;
  std::set<std::string> categories;
  std::set<std::string> model_ids;
  Pose anchor;
  Jitter jitter;  ///< applied to roots only; children use their edge's jitter
};

struct Edge {
  std::string parent;
  std::string child;
  Relation relation = Relation::OnTopOf;
  Pose offset;
  Jitter jitter;
};

struct SceneGraph {
  std::vector<SlotNode> nodes;
  std::vector<Edge> edges;

  const SlotNode* find(std::string_view slot) const {
    for (const auto& n : nodes) {
      if (n.slot_id == slot) return &n;
    }
    return nullptr;
  }

  std::set<std::string> slot_ids() const {
    std::set<std::string> out;
    for (const auto& n : nodes) out.insert(n.slot_id);
    return out;
  }

  const Edge* parent_edge(std::string_view child) const {
    for (const auto& e : edges) {
      if (e.child == child) return &e;
    }
    return nullptr;
  }

  /// Slots ordered so every parent precedes its children (roots in node
  /// order, then breadth-first). Throws InvalidTemplate unless the edges form
  /// a forest over existing slots.
  std::vector<std::string> topological_order() const {
    std::set<std::string> ids;
    for (const auto& n : nodes) {
      if (n.slot_id.empty() || !ids.insert(n.slot_id).second) {
        throw Error(ErrorCode::InvalidTemplate, "slot ids must be non-empty and unique ('" + n.slot_id + "')");
      }
    }
    std::map<std::string, std::vector<std::string>> children;
    std::set<std::string> has_parent;
    for (const auto& e : edges) {
      if (!ids.count(e.parent) || !ids.count(e.child)) {
        throw Error(ErrorCode::InvalidTemplate, "edge " + e.parent + " -> " + e.child + " names an unknown slot");
      }
      if (!has_parent.insert(e.child).second) {
        throw Error(ErrorCode::InvalidTemplate, "slot '" + e.child + "' has more than one parent");
      }
      children[e.parent].push_back(e.child);
    }
    std::vector<std::string> order;
    for (const auto& n : nodes) {
      if (!has_parent.count(n.slot_id)) order.push_back(n.slot_id);
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (const auto& c : children[order[i]]) order.push_back(c);
    }
    if (order.size() != nodes.size()) throw Error(ErrorCode::InvalidTemplate, "edges contain a cycle");
    return order;
  }
};

/// A template file: the initial-scene graph, an optional separate target
/// graph over the same slots, and an optional workspace override.
struct SceneTemplate {
  std::string template_id;
  SceneGraph initial;
  std::optional<SceneGraph> target;  ///< absent: the initial graph is re-instantiated
  std::optional<Workspace> workspace;

  const SceneGraph& target_graph() const { return target ? *target : initial; }
};

// ---- JSON ----

inline Jitter jitter_from_json(const Json& j) {
  Jitter out;
  if (j.contains("pos_range")) out.pos_range = vec3_from_json(j.at("pos_range"), "jitter.pos_range");
  out.yaw_range_deg = j.value("yaw_range_deg", 0.0);
  if ((out.pos_range.array() < 0.0).any() || out.yaw_range_deg < 0.0) {
    throw Error(ErrorCode::InvalidTemplate, "jitter ranges must be non-negative");
  }
  return out;
}

inline Json jitter_to_json(const Jitter& j) {
  return Json{{"pos_range", vec3_to_json(j.pos_range)}, {"yaw_range_deg", j.yaw_range_deg}};
}

inline Relation relation_from_string(const std::string& s) {
  if (s == "on_top_of") return Relation::OnTopOf;
  if (s == "adjacent_to") return Relation::AdjacentTo;
  throw Error(ErrorCode::InvalidTemplate, "unknown relation '" + s + "'");
}

inline SceneGraph graph_from_json(const Json& j) {
  return rbench::detail::parse_guard("scene graph", [&] {
    SceneGraph g;
    for (const auto& s : j.at("slots")) {
      SlotNode n;
      n.slot_id = s.at("slot_id").get<std::string>();
      if (s.contains("categories")) n.categories = s.at("categories").get<std::set<std::string>>();
      if (s.contains("model_ids")) n.model_ids = s.at("model_ids").get<std::set<std::string>>();
      if (n.categories.empty() && n.model_ids.empty()) {
        throw Error(ErrorCode::InvalidTemplate, "slot '" + n.slot_id + "' has an empty filter");
      }
      if (s.contains("anchor")) n.anchor = pose_from_json(s.at("anchor"));
      if (s.contains("jitter")) n.jitter = jitter_from_json(s.at("jitter"));
      g.nodes.push_back(std::move(n));
    }
    if (j.contains("edges")) {
      for (const auto& e : j.at("edges")) {
        Edge edge;
        edge.parent = e.at("parent").get<std::string>();
        edge.child = e.at("child").get<std::string>();
        edge.relation = relation_from_string(e.at("relation").get<std::string>());
        if (e.contains("offset")) edge.offset = pose_from_json(e.at("offset"));
        if (e.contains("jitter")) edge.jitter = jitter_from_json(e.at("jitter"));
        g.edges.push_back(std::move(edge));
      }
    }
    g.topological_order();
    return g;
  });
}

inline Json graph_to_json(const SceneGraph& g) {
  Json slots = Json::array();
  for (const auto& n : g.nodes) {
    Json s{{"slot_id", n.slot_id}, {"anchor", pose_to_json(n.anchor)}, {"jitter", jitter_to_json(n.jitter)}};
    if (!n.categories.empty()) s["categories"] = n.categories;
    if (!n.model_ids.empty()) s["model_ids"] = n.model_ids;
    slots.push_back(std::move(s));
  }
  Json edges = Json::array();
  for (const auto& e : g.edges) {
    edges.push_back(Json{{"parent", e.parent},
                         {"child", e.child},
                         {"relation", std::string(to_string(e.relation))},
                         {"offset", pose_to_json(e.offset)},
                         {"jitter", jitter_to_json(e.jitter)}});
  }
  return Json{{"slots", slots}, {"edges", edges}};
}

inline SceneTemplate template_from_json(const Json& j) {
  return rbench::detail::parse_guard("scene template", [&] {
    SceneTemplate t;
    t.template_id = j.value("template_id", std::string("template"));
    t.initial = graph_from_json(j);
    if (j.contains("target")) t.target = graph_from_json(j.at("target"));
    if (j.contains("workspace")) t.workspace = workspace_from_json(j.at("workspace"));
    if (t.initial.slot_ids() != t.target_graph().slot_ids()) {
      throw Error(ErrorCode::InvalidTemplate, "initial and target graphs must share the same slot set");
    }
    return t;
  });
}

inline Json template_to_json(const SceneTemplate& t) {
  Json j = graph_to_json(t.initial);
  j["template_id"] = t.template_id;
  if (t.target) j["target"] = graph_to_json(*t.target);
  if (t.workspace) j["workspace"] = workspace_to_json(*t.workspace);
  return j;
}

inline SceneTemplate load_template(const std::filesystem::path& path) {
  return template_from_json(read_json_file(path));
}

}  // namespace rbench::scenegen
