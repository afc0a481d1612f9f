#include "guardrail/json_io.hpp"

namespace guardrail {

ordered_json to_json(const SceneObject& obj) {
  ordered_json j;
  j["name"] = obj.name;
  j["instance_id"] = obj.instance_id;
  j["states"] = ordered_json::object();
  for (const auto& [k, v] : obj.states) {
    if (std::holds_alternative<bool>(v)) {
      j["states"][k] = std::get<bool>(v);
    } else {
      j["states"][k] = std::get<double>(v);
    }
  }
  j["materials"] = ordered_json::object();
  for (const auto& [k, v] : obj.materials) j["materials"][k] = v;
  j["contains"] = obj.contains;
  return j;
}

SceneObject scene_object_from_json(const ordered_json& j) {
  SceneObject obj;
  obj.name = j.at("name").get<std::string>();
  obj.instance_id = j.value("instance_id", obj.name + "_1");
  if (j.contains("states")) {
    for (const auto& [k, v] : j.at("states").items()) {
      if (v.is_boolean()) {
        obj.states[k] = v.get<bool>();
      } else {
        obj.states[k] = v.get<double>();
      }
    }
  }
  if (j.contains("materials")) {
    for (const auto& [k, v] : j.at("materials").items()) obj.materials[k] = v.get<bool>();
  }
  if (j.contains("contains")) obj.contains = j.at("contains").get<std::vector<std::string>>();
  return obj;
}

ordered_json to_json(const Observation& o) {
  ordered_json j;
  j["objects"] = ordered_json::array();
  for (const auto& obj : o.objects) j["objects"].push_back(to_json(obj));
  j["held_object"] = o.held_object;
  j["agent_location"] = o.agent_location;
  j["timestep"] = o.timestep;
  return j;
}

Observation observation_from_json(const ordered_json& j) {
  Observation o;
  if (j.contains("objects")) {
    for (const auto& obj_json : j.at("objects")) o.objects.push_back(scene_object_from_json(obj_json));
  }
  o.held_object = j.value("held_object", "");
  o.agent_location = j.value("agent_location", "");
  o.timestep = j.value("timestep", 0);
  return o;
}

ordered_json to_json(const ActionProposal& a) {
  ordered_json j;
  j["name"] = a.name;
  j["target"] = a.target;
  j["argument"] = a.argument;
  j["step_index"] = a.step_index;
  return j;
}

ActionProposal action_from_json(const ordered_json& j) {
  ActionProposal a;
  a.name = j.at("name").get<std::string>();
  a.target = j.value("target", "");
  a.argument = j.value("argument", "");
  a.step_index = j.value("step_index", 0);
  return a;
}

}  // namespace guardrail
