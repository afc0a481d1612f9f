#include "guardrail/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace guardrail {

std::string to_string(InstructionCategory c) {
  switch (c) {
    case InstructionCategory::contextual_unsafe: return "contextual_unsafe";
    case InstructionCategory::temporal_unsafe: return "temporal_unsafe";
    case InstructionCategory::safe: return "safe";
    case InstructionCategory::jailbreak: return "jailbreak";
  }
  return "safe";
}

InstructionCategory category_from_string(std::string_view s) {
  if (s == "contextual_unsafe") return InstructionCategory::contextual_unsafe;
  if (s == "temporal_unsafe") return InstructionCategory::temporal_unsafe;
  if (s == "safe") return InstructionCategory::safe;
  if (s == "jailbreak") return InstructionCategory::jailbreak;
  throw std::invalid_argument("unknown scenario category: " + std::string(s));
}

std::string to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::allow: return "allow";
    case VerdictKind::block: return "block";
    case VerdictKind::replan: return "replan";
  }
  return "allow";
}

const SceneObject* Observation::find_object(std::string_view name) const {
  for (const auto& obj : objects) {
    if (obj.name == name) return &obj;
  }
  return nullptr;
}

const SceneObject* Observation::find_instance(std::string_view instance_id) const {
  for (const auto& obj : objects) {
    if (obj.instance_id == instance_id) return &obj;
  }
  return nullptr;
}

EnvironmentProfile::EnvironmentProfile(std::vector<std::string> actions,
                                       std::map<std::string, std::string> synonyms,
                                       std::set<std::string> state_keys,
                                       std::set<std::string> material_keys,
                                       int embedding_dim)
    : actions_(std::move(actions)),
      synonyms_(std::move(synonyms)),
      state_keys_(std::move(state_keys)),
      material_keys_(std::move(material_keys)),
      embedding_dim_(embedding_dim) {}

const EnvironmentProfile& EnvironmentProfile::household() {
  static const EnvironmentProfile profile(
      {"pick", "put", "open", "close", "turn_on", "turn_off", "slice", "pour", "throw",
       "break", "navigate", "wait", "done"},
      {{"turn on", "turn_on"},
       {"switch on", "turn_on"},
       {"turn off", "turn_off"},
       {"switch off", "turn_off"},
       {"pick up", "pick"},
       {"pickup", "pick"},
       {"grab", "pick"},
       {"take", "pick"},
       {"place", "put"},
       {"go to", "navigate"},
       {"goto", "navigate"},
       {"shatter", "break"},
       {"cut", "slice"},
       {"toss", "throw"},
       {"stop", "done"},
       {"finish", "done"}},
      {"isOn", "isOpen", "isFilled", "isBroken", "isSliced", "isWet", "isThrown"},
      {"isMetal", "isSharp", "isFragile", "isFlammable", "isElectronic"},
      256);
  return profile;
}

bool EnvironmentProfile::has_action(std::string_view name) const {
  return std::find(actions_.begin(), actions_.end(), name) != actions_.end();
}

bool EnvironmentProfile::is_state_key(std::string_view key) const {
  return state_keys_.count(std::string(key)) > 0;
}

bool EnvironmentProfile::is_material_key(std::string_view key) const {
  return material_keys_.count(std::string(key)) > 0;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

namespace {

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = true;  // trims leading whitespace
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_space && !out.empty()) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(c);
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

// "Microwave_1" -> "microwave", "Fork|+00.12" -> "fork", spaces -> underscores.
std::string normalize_object_token(std::string_view raw) {
  std::string s = collapse_whitespace(to_lower(raw));
  if (auto bar = s.find('|'); bar != std::string::npos) s.erase(bar);
  std::replace(s.begin(), s.end(), ' ', '_');
  auto us = s.find_last_of('_');
  if (us != std::string::npos && us + 1 < s.size()) {
    bool digits = std::all_of(s.begin() + us + 1, s.end(),
                              [](unsigned char c) { return std::isdigit(c); });
    if (digits) s.erase(us);
  }
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s;
}

}  // namespace

ActionProposal normalize_action(std::string_view raw_name, std::string_view raw_target,
                                std::string_view raw_argument,
                                const EnvironmentProfile& profile) {
  std::string name = collapse_whitespace(to_lower(raw_name));
  if (name.empty()) throw std::invalid_argument("action name is empty");
  if (auto it = profile.synonyms().find(name); it != profile.synonyms().end()) {
    name = it->second;
  } else {
    std::replace(name.begin(), name.end(), ' ', '_');
  }
  if (!profile.has_action(name)) throw UnknownVerbError(name);

  ActionProposal out;
  out.name = std::move(name);
  out.target = normalize_object_token(raw_target);
  out.argument = normalize_object_token(raw_argument);
  return out;
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "0";
  return std::string(buf, end);
}

std::string action_text(const ActionProposal& a) {
  std::string out = a.name;
  out.push_back('(');
  out += a.target;
  if (!a.argument.empty()) {
    out.push_back(',');
    out += a.argument;
  }
  out.push_back(')');
  return out;
}

namespace {

std::string state_value_text(const StateValue& v) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
  return format_number(std::get<double>(v));
}

void render_object(const Observation& o, const SceneObject& obj, std::string& out) {
  out += obj.name;
  out.push_back('[');
  bool first = true;
  for (const auto& [key, value] : obj.states) {
    if (!first) out.push_back(',');
    out += key;
    out.push_back('=');
    out += state_value_text(value);
    first = false;
  }
  if (!obj.states.empty() && !obj.materials.empty()) out.push_back(';');
  first = true;
  for (const auto& [key, value] : obj.materials) {
    if (!first) out.push_back(',');
    out += key;
    out.push_back('=');
    out += value ? "true" : "false";
    first = false;
  }
  out.push_back(']');
  if (!obj.contains.empty()) {
    // Contained instances are rendered by object name, sorted, so the text is
    // stable no matter how the containment list was assembled.
    std::vector<std::string> names;
    names.reserve(obj.contains.size());
    for (const auto& id : obj.contains) {
      const SceneObject* inner = o.find_instance(id);
      names.push_back(inner ? inner->name : id);
    }
    std::sort(names.begin(), names.end());
    out += "(contains:";
    for (size_t i = 0; i < names.size(); ++i) {
      if (i > 0) out.push_back(',');
      out += names[i];
    }
    out.push_back(')');
  }
}

}  // namespace

std::string serialize_observation(const Observation& o) {
  std::vector<const SceneObject*> sorted;
  sorted.reserve(o.objects.size());
  for (const auto& obj : o.objects) sorted.push_back(&obj);
  std::sort(sorted.begin(), sorted.end(), [](const SceneObject* a, const SceneObject* b) {
    if (a->name != b->name) return a->name < b->name;
    return a->instance_id < b->instance_id;
  });

  std::string out;
  for (const SceneObject* obj : sorted) {
    render_object(o, *obj, out);
    out.push_back(' ');
  }
  out += "held:";
  out += o.held_object.empty() ? "none" : o.held_object;
  out += " loc:";
  out += o.agent_location.empty() ? "unknown" : o.agent_location;
  return out;
}

std::string serialize_trajectory(std::span<const StepRecord> steps) {
  std::string out;
  for (const StepRecord& rec : steps) {
    if (!out.empty()) out.push_back(' ');
    out.push_back('t');
    out += std::to_string(rec.step_index);
    out.push_back(':');
    if (!rec.executed) out += "blocked:";
    out += action_text(rec.action);
  }
  return out;
}

}  // namespace guardrail
