#pragma once

#include <set>
#include <string>
#include <variant>
#include <vector>

#include "rbench/core/json_io.hpp"

namespace rbench::harness {

struct Pick {
  InstanceId id;
  friend bool operator==(const Pick&, const Pick&) = default;
};

struct Place {
  InstanceId id;
  Pose pose;
  friend bool operator==(const Place&, const Place&) = default;
};

using Action = std::variant<Pick, Place>;

inline const InstanceId& action_id(const Action& a) {
  return std::visit([](const auto& x) -> const InstanceId& { return x.id; }, a);
}

struct ActionScript {
  std::vector<Action> actions;
};

/// Every Place must follow an un-consumed Pick of the same instance, and an
/// instance may not be picked again while a Pick of it is outstanding.
inline void check_well_formed(const ActionScript& script) {
  std::set<InstanceId> outstanding;
  for (std::size_t i = 0; i < script.actions.size(); ++i) {
    const Action& a = script.actions[i];
    if (const auto* pick = std::get_if<Pick>(&a)) {
      if (!outstanding.insert(pick->id).second) {
        throw Error(ErrorCode::MalformedScript,
                    "action " + std::to_string(i) + " picks '" + pick->id + "' twice without a place");
      }
    } else {
      const auto& place = std::get<Place>(a);
      if (!outstanding.erase(place.id)) {
        throw Error(ErrorCode::MalformedScript,
                    "action " + std::to_string(i) + " places '" + place.id + "' without a matching pick");
      }
    }
  }
}

inline Json script_to_json(const ActionScript& script) {
  Json actions = Json::array();
  for (const auto& a : script.actions) {
    if (const auto* pick = std::get_if<Pick>(&a)) {
      actions.push_back(Json{{"op", "pick"}, {"id", pick->id}});
    } else {
      const auto& place = std::get<Place>(a);
      Json j = pose_to_json(place.pose);
      j["op"] = "place";
      j["id"] = place.id;
      actions.push_back(std::move(j));
    }
  }
  return Json{{"actions", actions}};
}

inline ActionScript script_from_json(const Json& j) {
  return rbench::detail::parse_guard("action script", [&] {
    ActionScript script;
    for (const auto& a : j.at("actions")) {
      const auto op = a.at("op").get<std::string>();
      auto id = a.at("id").get<std::string>();
      if (op == "pick") {
        script.actions.emplace_back(Pick{std::move(id)});
      } else if (op == "place") {
        script.actions.emplace_back(Place{std::move(id), pose_from_json(a)});
      } else {
        throw Error(ErrorCode::MalformedScript, "unknown op '" + op + "'");
      }
    }
    return script;
  });
}

inline ActionScript load_script(const std::filesystem::path& path) { return script_from_json(read_json_file(path)); }

}  // namespace rbench::harness
