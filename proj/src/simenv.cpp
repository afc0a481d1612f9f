#include "guardrail/simenv.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "guardrail/envelope.hpp"

namespace guardrail::sim {

namespace fs = std::filesystem;

Observation WorldState::observe() const {
  Observation o;
  o.objects.reserve(objects.size());
  for (const auto& [id, obj] : objects) o.objects.push_back(obj);
  std::sort(o.objects.begin(), o.objects.end(), [](const SceneObject& a, const SceneObject& b) {
    if (a.name != b.name) return a.name < b.name;
    return a.instance_id < b.instance_id;
  });
  if (!held_instance.empty()) {
    auto it = objects.find(held_instance);
    if (it != objects.end()) o.held_object = it->second.name;
  }
  o.agent_location = agent_location;
  o.timestep = clock;
  return o;
}

const SceneObject* WorldState::find_by_name(const std::string& name) const {
  const SceneObject* best = nullptr;
  for (const auto& [id, obj] : objects) {
    if (obj.name == name && (best == nullptr || id < best->instance_id)) best = &obj;
  }
  return best;
}

SceneObject* WorldState::find_by_name_mutable(const std::string& name) {
  SceneObject* best = nullptr;
  for (auto& [id, obj] : objects) {
    if (obj.name == name && (best == nullptr || id < best->instance_id)) best = &obj;
  }
  return best;
}

std::string WorldState::container_of(const std::string& instance_id) const {
  for (const auto& [id, obj] : objects) {
    if (std::find(obj.contains.begin(), obj.contains.end(), instance_id) != obj.contains.end()) {
      return id;
    }
  }
  return "";
}

namespace {

[[noreturn]] void scenario_fail(const std::string& source, const std::string& field,
                                const std::string& message) {
  throw ScenarioError(source + ": " + field + ": " + message);
}

void validate_world(const WorldState& w, const std::string& source) {
  std::set<std::string> contained;
  for (const auto& [id, obj] : w.objects) {
    if (obj.instance_id != id) scenario_fail(source, "world.objects", "instance key mismatch");
    for (const auto& inner : obj.contains) {
      if (w.objects.find(inner) == w.objects.end()) {
        scenario_fail(source, "world.objects." + id + ".contains",
                      "unknown instance '" + inner + "'");
      }
      if (!contained.insert(inner).second) {
        scenario_fail(source, "world.objects", "instance '" + inner + "' in two containers");
      }
    }
  }
  // Containment must be acyclic: walk up from every object.
  for (const auto& [id, obj] : w.objects) {
    std::set<std::string> seen;
    std::string cur = id;
    while (true) {
      std::string parent = w.container_of(cur);
      if (parent.empty()) break;
      if (!seen.insert(parent).second) {
        scenario_fail(source, "world.objects", "containment cycle through '" + parent + "'");
      }
      cur = parent;
    }
  }
  if (!w.held_instance.empty()) {
    if (w.objects.find(w.held_instance) == w.objects.end()) {
      scenario_fail(source, "world.held", "held instance '" + w.held_instance + "' unknown");
    }
    if (!w.container_of(w.held_instance).empty()) {
      scenario_fail(source, "world.held", "held instance is also inside a container");
    }
  }
}

}  // namespace

Scenario scenario_from_json(const ordered_json& doc, const std::string& source_name) {
  Scenario sc;
  try {
    sc.id = doc.at("id").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    scenario_fail(source_name, "id", "missing or not a string");
  }
  const std::string src = source_name + " (" + sc.id + ")";
  try {
    sc.category = category_from_string(doc.at("category").get<std::string>());
  } catch (const std::exception& e) {
    scenario_fail(src, "category", e.what());
  }
  try {
    sc.instruction.text = doc.at("instruction").get<std::string>();
    sc.instruction.category = sc.category;
  } catch (const nlohmann::json::exception&) {
    scenario_fail(src, "instruction", "missing or not a string");
  }
  if (sc.instruction.text.empty()) scenario_fail(src, "instruction", "must be nonempty");
  sc.counterpart_id = doc.value("counterpart_id", "");

  if (!doc.contains("world")) scenario_fail(src, "world", "missing");
  const auto& world = doc.at("world");
  sc.initial_world.agent_location = world.value("agent_location", "");
  try {
    for (const auto& obj_json : world.at("objects")) {
      SceneObject obj = scene_object_from_json(obj_json);
      if (sc.initial_world.objects.count(obj.instance_id) > 0) {
        scenario_fail(src, "world.objects", "duplicate instance '" + obj.instance_id + "'");
      }
      sc.initial_world.objects[obj.instance_id] = std::move(obj);
    }
  } catch (const nlohmann::json::exception& e) {
    scenario_fail(src, "world.objects", e.what());
  }
  std::string held = world.value("held", "");
  if (!held.empty()) sc.initial_world.held_instance = held;
  validate_world(sc.initial_world, src);

  if (!doc.contains("plan")) scenario_fail(src, "plan", "missing");
  int idx = 0;
  for (const auto& step_json : doc.at("plan")) {
    std::string name, target, argument;
    try {
      name = step_json.at("action").get<std::string>();
      target = step_json.value("target", "");
      argument = step_json.value("argument", "");
    } catch (const nlohmann::json::exception& e) {
      scenario_fail(src, "plan[" + std::to_string(idx) + "]", e.what());
    }
    try {
      ActionProposal a = normalize_action(name, target, argument);
      sc.plan.push_back(std::move(a));
    } catch (const std::exception& e) {
      scenario_fail(src, "plan[" + std::to_string(idx) + "]", e.what());
    }
    ++idx;
  }

  idx = 0;
  for (const auto& rule_json : doc.value("hazard_rules", ordered_json::array())) {
    HazardRule rule;
    try {
      rule.tag = rule_json.at("tag").get<std::string>();
      rule.source = rule_json.at("when").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      scenario_fail(src, "hazard_rules[" + std::to_string(idx) + "]", e.what());
    }
    try {
      rule.expr = dsl::parse_predicate(rule.source);
    } catch (const dsl::ParseError& e) {
      scenario_fail(src, "hazard_rules[" + std::to_string(idx) + "].when", e.what());
    }
    sc.hazard_rules.push_back(std::move(rule));
    ++idx;
  }

  idx = 0;
  std::vector<TemporalPredicate> constraints;
  for (const auto& tc : doc.value("temporal_constraints", ordered_json::array())) {
    TemporalPredicate p;
    try {
      p.kind = temporal_kind_from_string(tc.at("kind").get<std::string>());
      p.trigger.name = tc.at("trigger").at("name").get<std::string>();
      p.trigger.target = tc.at("trigger").value("target", "*");
      p.response.name = tc.at("response").at("name").get<std::string>();
      p.response.target = tc.at("response").value("target", "*");
      p.window = tc.value("window", 0);
    } catch (const std::exception& e) {
      scenario_fail(src, "temporal_constraints[" + std::to_string(idx) + "]", e.what());
    }
    constraints.push_back(std::move(p));
    ++idx;
  }
  sc.temporal_constraints = normalize_temporal_set(std::move(constraints));

  sc.expected_hazard_tags =
      doc.value("expected_hazard_tags", std::vector<std::string>{});

  if (doc.contains("script")) {
    const auto& script = doc.at("script");
    for (const auto& parts_json : script.value("contextual_logic", ordered_json::array())) {
      std::string reasoning = parts_json.value("reasoning", "");
      std::vector<std::string> predicates =
          parts_json.value("predicates", std::vector<std::string>{});
      sc.script[RequestKind::contextual_logic].push_back(
          render_contextual_envelope(reasoning, predicates));
    }
    for (const auto& records_json : script.value("temporal_predicates", ordered_json::array())) {
      std::vector<TemporalRecord> records;
      for (const auto& r : records_json) {
        TemporalRecord rec;
        rec.kind = r.at("kind").get<std::string>();
        rec.trigger_name = r.at("trigger").at("name").get<std::string>();
        rec.trigger_target = r.at("trigger").value("target", "*");
        rec.response_name = r.at("response").at("name").get<std::string>();
        rec.response_target = r.at("response").value("target", "*");
        rec.window = r.value("window", 0);
        records.push_back(std::move(rec));
      }
      sc.script[RequestKind::temporal_predicates].push_back(render_temporal_envelope(records));
    }
    for (const auto& steps_json : script.value("replan_sequence", ordered_json::array())) {
      std::vector<ActionProposal> steps;
      for (const auto& s : steps_json) steps.push_back(parse_action_text(s.get<std::string>()));
      sc.script[RequestKind::replan_sequence].push_back(render_replan_envelope(steps));
    }
    for (const auto& objs_json : script.value("extract_objects", ordered_json::array())) {
      std::vector<SceneObject> objs;
      for (const auto& oj : objs_json) objs.push_back(scene_object_from_json(oj));
      sc.script[RequestKind::extract_objects].push_back(render_objects_envelope(objs));
    }
  }

  if (doc.contains("seed")) {
    int step = -1;
    try {
      step = doc.at("seed").at("step").get<int>();
    } catch (const nlohmann::json::exception& e) {
      scenario_fail(src, "seed.step", e.what());
    }
    if (step < 0 || step >= static_cast<int>(sc.plan.size())) {
      scenario_fail(src, "seed.step", "out of plan range");
    }
    sc.seed_step = step;
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(path + ": not valid JSON: " + e.what());
  }
  return scenario_from_json(doc, path);
}

std::vector<Scenario> load_scenario_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw ScenarioError("not a scenario directory: " + dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      paths.push_back(entry.path().string());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<Scenario> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(load_scenario(p));
  std::sort(out.begin(), out.end(),
            [](const Scenario& a, const Scenario& b) { return a.id < b.id; });
  return out;
}

std::pair<WorldState, Observation> reset(const Scenario& sc) {
  WorldState w = sc.initial_world;
  w.clock = 0;
  return {w, w.observe()};
}

namespace {

ExecutionOutcome fail(const std::string& why) { return {false, why}; }

bool has_state_key(const SceneObject& obj, const std::string& key) {
  return obj.states.find(key) != obj.states.end();
}

// The agent can act on an object when standing at it or at its container.
bool anchored(const WorldState& w, const SceneObject& obj) {
  if (w.agent_location == obj.name) return true;
  std::string container = w.container_of(obj.instance_id);
  if (container.empty()) return false;
  auto it = w.objects.find(container);
  return it != w.objects.end() && w.agent_location == it->second.name;
}

void remove_from_containers(WorldState& w, const std::string& instance_id) {
  for (auto& [id, obj] : w.objects) {
    obj.contains.erase(std::remove(obj.contains.begin(), obj.contains.end(), instance_id),
                       obj.contains.end());
  }
}

}  // namespace

ExecutionOutcome step(WorldState& w, const ActionProposal& a) {
  ++w.clock;

  if (a.name == "navigate") {
    if (a.target.empty()) return fail("navigate needs a target");
    w.agent_location = a.target;
    return {true, ""};
  }
  if (a.name == "wait" || a.name == "done") return {true, ""};

  if (a.name == "pick") {
    if (!w.held_instance.empty()) return fail("hands full");
    SceneObject* obj = w.find_by_name_mutable(a.target);
    if (obj == nullptr) return fail("no such object: " + a.target);
    if (!anchored(w, *obj)) return fail("not at " + a.target);
    std::string id = obj->instance_id;
    remove_from_containers(w, id);
    w.held_instance = id;
    return {true, ""};
  }
  if (a.name == "put") {
    if (w.held_instance.empty()) return fail("hands empty");
    const SceneObject& held = w.objects.at(w.held_instance);
    if (held.name != a.target) return fail("not holding " + a.target);
    SceneObject* dest = w.find_by_name_mutable(a.argument);
    if (dest == nullptr) return fail("no such destination: " + a.argument);
    if (w.agent_location != dest->name) return fail("not at " + a.argument);
    dest->contains.push_back(w.held_instance);
    w.held_instance.clear();
    return {true, ""};
  }
  if (a.name == "open" || a.name == "close") {
    SceneObject* obj = w.find_by_name_mutable(a.target);
    if (obj == nullptr) return fail("no such object: " + a.target);
    if (!has_state_key(*obj, "isOpen")) return fail(a.target + " cannot be opened");
    if (!anchored(w, *obj)) return fail("not at " + a.target);
    obj->states["isOpen"] = (a.name == "open");
    return {true, ""};
  }
  if (a.name == "turn_on" || a.name == "turn_off") {
    SceneObject* obj = w.find_by_name_mutable(a.target);
    if (obj == nullptr) return fail("no such object: " + a.target);
    if (!has_state_key(*obj, "isOn")) return fail(a.target + " has no switch");
    if (!anchored(w, *obj)) return fail("not at " + a.target);
    bool on = (a.name == "turn_on");
    obj->states["isOn"] = on;
    if (on && obj->name == "faucet") {
      // Running water fills the sink and wets whatever sits in it.
      if (SceneObject* sink = w.find_by_name_mutable("sink")) {
        sink->states["isFilled"] = true;
        for (const auto& inner_id : sink->contains) {
          auto it = w.objects.find(inner_id);
          if (it != w.objects.end()) it->second.states["isWet"] = true;
        }
      }
    }
    return {true, ""};
  }
  if (a.name == "slice") {
    if (w.held_instance.empty() || w.objects.at(w.held_instance).name != "knife") {
      return fail("slicing needs a held knife");
    }
    SceneObject* obj = w.find_by_name_mutable(a.target);
    if (obj == nullptr) return fail("no such object: " + a.target);
    if (!has_state_key(*obj, "isSliced")) return fail(a.target + " cannot be sliced");
    if (!anchored(w, *obj)) return fail("not at " + a.target);
    obj->states["isSliced"] = true;
    return {true, ""};
  }
  if (a.name == "pour") {
    if (w.held_instance.empty()) return fail("hands empty");
    SceneObject& held = w.objects.at(w.held_instance);
    if (held.name != a.target) return fail("not holding " + a.target);
    auto filled = held.states.find("isFilled");
    if (filled == held.states.end() || !std::holds_alternative<bool>(filled->second) ||
        !std::get<bool>(filled->second)) {
      return fail(a.target + " is empty");
    }
    SceneObject* dest = w.find_by_name_mutable(a.argument);
    if (dest == nullptr) return fail("no such destination: " + a.argument);
    if (w.agent_location != dest->name) return fail("not at " + a.argument);
    held.states["isFilled"] = false;
    dest->states["isWet"] = true;
    return {true, ""};
  }
  if (a.name == "throw") {
    if (w.held_instance.empty()) return fail("hands empty");
    SceneObject& held = w.objects.at(w.held_instance);
    if (held.name != a.target) return fail("not holding " + a.target);
    held.states["isThrown"] = true;
    auto fragile = held.materials.find("isFragile");
    if (fragile != held.materials.end() && fragile->second) held.states["isBroken"] = true;
    w.held_instance.clear();
    return {true, ""};
  }
  if (a.name == "break") {
    SceneObject* obj = w.find_by_name_mutable(a.target);
    if (obj == nullptr) return fail("no such object: " + a.target);
    if (!anchored(w, *obj)) return fail("not at " + a.target);
    obj->states["isBroken"] = true;
    return {true, ""};
  }
  return fail("unmodeled action: " + a.name);
}

std::vector<HazardEvent> hazard_oracle(std::span<const TrajectoryStep> trajectory,
                                       const Scenario& sc) {
  std::vector<HazardEvent> events;
  for (const HazardRule& rule : sc.hazard_rules) {
    for (const TrajectoryStep& step : trajectory) {
      if (!step.executed) continue;  // a blocked action changes nothing
      bool fired = false;
      try {
        fired = dsl::evaluate_predicate(*rule.expr, step.action, step.post_observation);
      } catch (const dsl::EvalError&) {
        fired = false;  // a rule about absent objects is simply not in force
      }
      if (fired) {
        events.push_back({rule.tag, step.step_index, rule.source});
        break;  // first materialization per rule
      }
    }
  }
  return events;
}

TemporalOracleResult temporal_oracle(std::span<const TrajectoryStep> trajectory,
                                     std::span<const TemporalPredicate> constraints) {
  TemporalOracleResult result;
  std::vector<const TrajectoryStep*> executed;
  for (const TrajectoryStep& s : trajectory) {
    if (s.executed) executed.push_back(&s);
  }

  for (const TemporalPredicate& p : constraints) {
    for (size_t i = 0; i < executed.size(); ++i) {
      if (!p.trigger.matches(executed[i]->action)) continue;
      const int trigger_step = executed[i]->step_index;
      bool ok = false;
      int detected = trigger_step;
      if (p.kind == TemporalKind::prerequisite) {
        for (size_t j = 0; j < i; ++j) {
          if (p.response.matches(executed[j]->action)) ok = true;
        }
      } else if (p.kind == TemporalKind::obligation) {
        for (size_t j = i + 1; j < executed.size(); ++j) {
          int s = executed[j]->step_index;
          if (s > trigger_step + p.window) break;
          if (p.response.matches(executed[j]->action)) ok = true;
        }
        detected = trigger_step + p.window + 1;
      } else {  // adjacency: the very next executed action
        if (i + 1 < executed.size() && p.response.matches(executed[i + 1]->action)) ok = true;
        detected = trigger_step + 1;
      }
      if (!ok) {
        result.violations.push_back({p, trigger_step, detected, p.response});
      }
    }
  }
  result.conform = result.violations.empty();
  return result;
}

}  // namespace guardrail::sim
