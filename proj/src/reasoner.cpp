#include "guardrail/reasoner.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <httplib.h>

#include "guardrail/json_io.hpp"
#include "guardrail/log.hpp"

namespace guardrail {

std::string to_string(RequestKind k) {
  switch (k) {
    case RequestKind::extract_objects: return "extract_objects";
    case RequestKind::contextual_logic: return "contextual_logic";
    case RequestKind::temporal_predicates: return "temporal_predicates";
    case RequestKind::replan_sequence: return "replan_sequence";
  }
  return "contextual_logic";
}

std::vector<SceneObject> Reasoner::extract_objects(const ReasonerRequest& req) {
  return parse_objects_envelope(complete(req).raw);
}

ContextualParts Reasoner::propose_contextual_logic(const ReasonerRequest& req) {
  return parse_contextual_envelope(complete(req).raw);
}

std::vector<TemporalRecord> Reasoner::propose_temporal_predicates(const ReasonerRequest& req) {
  return parse_temporal_envelope(complete(req).raw);
}

std::vector<ActionProposal> Reasoner::propose_replan_sequence(const ReasonerRequest& req) {
  const std::string expected_name = req.section("response_name");
  const std::string expected_target = req.section("response_target");
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::vector<ActionProposal> steps = parse_replan_envelope(complete(req).raw);
    bool has_response = std::any_of(steps.begin(), steps.end(), [&](const ActionProposal& a) {
      return expected_name == a.name &&
             (expected_target == "*" || expected_target.empty() || expected_target == a.target);
    });
    if (has_response) return steps;
    log::warn("replan sequence from " + name() + " lacks response action " + expected_name +
              "; " + (attempt == 0 ? "retrying once" : "giving up"));
  }
  throw ReasonerError("replan sequence lacks required response action " + expected_name);
}

std::string observation_to_json_text(const Observation& o) { return to_json(o).dump(); }

Observation observation_from_json_text(const std::string& text) {
  return observation_from_json(ordered_json::parse(text));
}

std::string demonstrations_to_json_text(const std::vector<DemonstrationRecord>& demos) {
  ordered_json arr = ordered_json::array();
  for (const auto& d : demos) {
    ordered_json j;
    j["entry_id"] = d.entry_id;
    j["label"] = d.label;
    j["reasoning"] = d.reasoning;
    j["predicates"] = d.predicates;
    arr.push_back(std::move(j));
  }
  return arr.dump();
}

std::vector<DemonstrationRecord> demonstrations_from_json_text(const std::string& text) {
  std::vector<DemonstrationRecord> out;
  if (text.empty()) return out;
  for (const auto& j : ordered_json::parse(text)) {
    DemonstrationRecord d;
    d.entry_id = j.at("entry_id").get<std::string>();
    d.label = j.at("label").get<std::string>();
    d.reasoning = j.at("reasoning").get<std::string>();
    d.predicates = j.at("predicates").get<std::vector<std::string>>();
    out.push_back(std::move(d));
  }
  return out;
}

MockReasoner::MockReasoner(const EnvironmentProfile& profile) : profile_(&profile) {}

ReasonerResponse MockReasoner::complete(const ReasonerRequest& req) {
  switch (req.kind) {
    case RequestKind::extract_objects:
      // The scene payload stands in for the image; the mock trusts the
      // declared scene verbatim.
      return {req.section("scene")};
    case RequestKind::contextual_logic: return {complete_contextual(req)};
    case RequestKind::temporal_predicates: return {complete_temporal(req)};
    case RequestKind::replan_sequence: return {complete_replan(req)};
  }
  throw ReasonerError("mock: unsupported request kind");
}

namespace {

bool material_is(const SceneObject& obj, const std::string& key) {
  auto it = obj.materials.find(key);
  return it != obj.materials.end() && it->second;
}

bool state_is_true(const SceneObject& obj, const std::string& key) {
  auto it = obj.states.find(key);
  return it != obj.states.end() && std::holds_alternative<bool>(it->second) &&
         std::get<bool>(it->second);
}

// Names of objects contained in `container` that satisfy `pred`.
std::vector<std::string> contained_matching(const Observation& o, const SceneObject& container,
                                            bool (*pred)(const SceneObject&)) {
  std::vector<std::string> names;
  for (const auto& id : container.contains) {
    const SceneObject* inner = o.find_instance(id);
    if (inner != nullptr && pred(*inner)) names.push_back(inner->name);
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

bool contains_word(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

// Innate hazard patterns: metal in a running microwave, flammables on heating
// appliances, liquids poured over powered or electronic devices, breaking or
// throwing fragile/sharp objects. Retrieved risky demonstrations are
// re-emitted as-is; their predicates only fire when the stored risk context
// actually matches the live one.
std::string MockReasoner::complete_contextual(const ReasonerRequest& req) const {
  ActionProposal action = parse_action_text(req.section("action"));
  Observation obs = observation_from_json_text(req.section("observation_json"));

  std::vector<std::string> reasoning;
  std::vector<std::string> predicates;
  auto emit = [&](const std::string& why, const std::string& predicate) {
    reasoning.push_back(why);
    predicates.push_back(predicate);
  };

  if (action.name == "turn_on" && action.target == "microwave") {
    if (const SceneObject* mw = obs.find_object("microwave")) {
      for (const std::string& metal : contained_matching(
               obs, *mw, [](const SceneObject& x) { return material_is(x, "isMetal"); })) {
        emit("Running the microwave with the metal " + metal +
                 " inside can cause arcing and fire.",
             "action.name == 'turn_on' and action.target == 'microwave' and "
             "obs.object('microwave').contains('" + metal + "')");
      }
    }
  }
  if (action.name == "turn_on" && (action.target == "stove" || action.target == "toaster")) {
    if (const SceneObject* appliance = obs.find_object(action.target)) {
      for (const std::string& flammable : contained_matching(
               obs, *appliance, [](const SceneObject& x) { return material_is(x, "isFlammable"); })) {
        emit("Heating the " + action.target + " with the flammable " + flammable +
                 " on it risks ignition.",
             "action.name == 'turn_on' and action.target == '" + action.target + "' and "
             "obs.object('" + action.target + "').contains('" + flammable + "')");
      }
    }
  }
  if (action.name == "pour" && !action.argument.empty()) {
    if (const SceneObject* target = obs.find_object(action.argument)) {
      if (state_is_true(*target, "isOn")) {
        emit("Pouring liquid onto the powered-on " + target->name +
                 " can short-circuit it and start a fire.",
             "action.name == 'pour' and action.argument == '" + target->name + "' and "
             "obs.object('" + target->name + "').state('isOn') == true");
      } else if (material_is(*target, "isElectronic")) {
        emit("Pouring liquid onto the electronic " + target->name + " will destroy it.",
             "action.name == 'pour' and action.argument == '" + target->name + "' and "
             "obs.object('" + target->name + "').material('isElectronic') == true");
      }
    }
  }
  if (action.name == "break" && !action.target.empty()) {
    if (const SceneObject* target = obs.find_object(action.target)) {
      if (material_is(*target, "isFragile")) {
        emit("Breaking the fragile " + target->name + " scatters sharp shards.",
             "action.name == 'break' and action.target == '" + target->name + "' and "
             "obs.object('" + target->name + "').material('isFragile') == true");
      }
    }
  }
  if (action.name == "throw" && !action.target.empty()) {
    if (const SceneObject* target = obs.find_object(action.target)) {
      if (material_is(*target, "isSharp")) {
        emit("Throwing the sharp " + target->name + " endangers anyone nearby.",
             "action.name == 'throw' and action.target == '" + target->name + "' and "
             "obs.object('" + target->name + "').material('isSharp') == true");
      } else if (material_is(*target, "isFragile")) {
        emit("Throwing the fragile " + target->name + " will shatter it.",
             "action.name == 'throw' and action.target == '" + target->name + "' and "
             "obs.object('" + target->name + "').material('isFragile') == true");
      }
    }
  }

  // Knowledge transfer from retrieved experiences (Fig.: in-context safety
  // knowledge). Only risky demonstrations contribute risk predicates.
  std::set<std::string> seen(predicates.begin(), predicates.end());
  for (const DemonstrationRecord& demo :
       demonstrations_from_json_text(req.section("demonstrations_json"))) {
    if (demo.label != "risky") continue;
    for (const std::string& source : demo.predicates) {
      if (seen.insert(source).second) {
        reasoning.push_back("Retrieved experience " + demo.entry_id + " warns: " + demo.reasoning);
        predicates.push_back(source);
      }
    }
  }

  std::string rho;
  if (reasoning.empty()) {
    rho = "No contextual risk identified for " + action_text(action) + " in this scene.";
  } else {
    for (size_t i = 0; i < reasoning.size(); ++i) {
      if (i > 0) rho += "\n";
      rho += reasoning[i];
    }
  }
  return render_contextual_envelope(rho, predicates);
}

// Instruction-keyword table for temporal requirements. Keyed on the task
// text only (inference happens before execution starts).
std::string MockReasoner::complete_temporal(const ReasonerRequest& req) const {
  std::string text = to_lower(req.section("instruction"));
  std::vector<TemporalRecord> records;

  auto add = [&records](std::string kind, std::string tn, std::string tt, std::string rn,
                        std::string rt, int window) {
    records.push_back({std::move(kind), std::move(tn), std::move(tt), std::move(rn),
                       std::move(rt), window});
  };

  bool metal_microwave = contains_word(text, "microwave") &&
                         (contains_word(text, "fork") || contains_word(text, "knife"));
  if (metal_microwave) {
    std::string metal = contains_word(text, "fork") ? "fork" : "knife";
    add("prerequisite", "turn_on", "microwave", "pick", metal, 0);
  }
  if (contains_word(text, "toaster") && contains_word(text, "fork")) {
    add("prerequisite", "turn_on", "toaster", "pick", "fork", 0);
  } else if (contains_word(text, "toaster")) {
    add("obligation", "turn_on", "toaster", "turn_off", "toaster", 2);
  }
  if (contains_word(text, "stove")) {
    add("obligation", "turn_on", "stove", "turn_off", "stove", 2);
  }
  if (contains_word(text, "fridge")) {
    add("obligation", "open", "fridge", "close", "fridge", 2);
  }
  if (contains_word(text, "faucet")) {
    if (contains_word(text, "right after") || contains_word(text, "immediately")) {
      add("adjacency", "turn_on", "faucet", "turn_off", "faucet", 0);
    } else {
      add("obligation", "turn_on", "faucet", "turn_off", "faucet", 3);
    }
  }
  if (contains_word(text, "cabinet")) {
    add("adjacency", "open", "cabinet", "close", "cabinet", 0);
  }
  return render_temporal_envelope(records);
}

// Exactly the response action, prefixed by a navigate when the agent is not
// already where the response has to happen.
std::string MockReasoner::complete_replan(const ReasonerRequest& req) const {
  ActionProposal response;
  response.name = req.section("response_name");
  response.target = req.section("response_target");
  if (response.target == "*") response.target = req.section("trigger_target");
  if (response.target == "*") response.target.clear();

  std::string location = req.section("location");
  std::string anchor = response.target;
  std::string obs_json = req.section("observation_json");
  if (!obs_json.empty() && !response.target.empty()) {
    Observation obs = observation_from_json_text(obs_json);
    // A contained object is manipulated at its container.
    for (const auto& container : obs.objects) {
      for (const auto& id : container.contains) {
        const SceneObject* inner = obs.find_instance(id);
        if (inner != nullptr && inner->name == response.target) anchor = container.name;
      }
    }
  }

  std::vector<ActionProposal> steps;
  if (!anchor.empty() && location != anchor) {
    ActionProposal nav;
    nav.name = "navigate";
    nav.target = anchor;
    steps.push_back(nav);
  }
  steps.push_back(response);
  return render_replan_envelope(steps);
}

void ScriptedReasoner::push_response(RequestKind kind, std::string envelope_text) {
  scripts_[kind].push_back(std::move(envelope_text));
}

ReasonerResponse ScriptedReasoner::complete(const ReasonerRequest& req) {
  auto& queue = scripts_[req.kind];
  if (queue.empty()) {
    throw ScriptExhaustedError("script-exhausted for kind " + to_string(req.kind));
  }
  std::string raw = std::move(queue.front());
  queue.pop_front();
  return {std::move(raw)};
}

size_t ScriptedReasoner::remaining(RequestKind kind) const {
  auto it = scripts_.find(kind);
  return it == scripts_.end() ? 0 : it->second.size();
}

HttpReasoner::HttpReasoner(HttpReasonerConfig config) : config_(std::move(config)) {
  if (config_.url.empty()) throw std::invalid_argument("HttpReasoner: url is required");
}

namespace {

std::pair<std::string, std::string> split_http_url(const std::string& url) {
  auto scheme_end = url.find("://");
  size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = url.find('/', host_start);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string default_template(RequestKind kind) {
  // Fallback when no prompt_dir is configured; versioned templates in
  // assets/prompts/ take precedence.
  switch (kind) {
    case RequestKind::extract_objects:
      return "List every visible object in the scene with its states and material "
             "properties.\nRespond with an OBJECTS envelope terminated by END.\n\nSCENE:\n"
             "{{scene}}\n";
    case RequestKind::contextual_logic:
      return "Decide whether the proposed action is hazardous in this exact situation.\n"
             "Respond with REASONING: and PREDICATES: sections terminated by END; one "
             "risk-positive predicate per line (true means risk).\n\nINSTRUCTION:\n"
             "{{instruction}}\nOBSERVATION:\n{{observation}}\nACTION:\n{{action}}\n"
             "TRAJECTORY:\n{{trajectory}}\nDEMONSTRATIONS:\n{{demonstrations}}\n";
    case RequestKind::temporal_predicates:
      return "Decompose the instruction into temporal safety predicates (prerequisite, "
             "obligation, adjacency).\nRespond with a TEMPORAL envelope terminated by END.\n\n"
             "INSTRUCTION:\n{{instruction}}\n";
    case RequestKind::replan_sequence:
      return "A temporal safety predicate was violated. Produce a short corrective action "
             "sequence that includes the missing response action.\nRespond with a STEPS "
             "envelope terminated by END.\n\nVIOLATION:\n{{violation}}\nLOCATION:\n"
             "{{location}}\n";
  }
  return "{{instruction}}";
}

}  // namespace

std::string HttpReasoner::build_prompt(const ReasonerRequest& req) const {
  std::string tpl;
  if (!config_.prompt_dir.empty()) {
    std::ifstream in(config_.prompt_dir + "/" + to_string(req.kind) + ".txt");
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      tpl = ss.str();
    }
  }
  if (tpl.empty()) tpl = default_template(req.kind);

  for (const auto& [key, value] : req.sections) {
    std::string placeholder = "{{" + key + "}}";
    size_t pos = 0;
    while ((pos = tpl.find(placeholder, pos)) != std::string::npos) {
      tpl.replace(pos, placeholder.size(), value);
      pos += value.size();
    }
  }
  // Unfilled placeholders collapse to empty.
  size_t open;
  while ((open = tpl.find("{{")) != std::string::npos) {
    size_t close = tpl.find("}}", open);
    if (close == std::string::npos) break;
    tpl.erase(open, close - open + 2);
  }
  return tpl;
}

std::string HttpReasoner::post_chat(const std::string& prompt) const {
  auto [base, path] = split_http_url(config_.url);
  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    httplib::Client client(base);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);
    httplib::Headers headers;
    if (!config_.auth_token.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.auth_token);
    }
    nlohmann::json body;
    body["model"] = config_.model;
    body["temperature"] = 0;
    body["messages"] = nlohmann::json::array(
        {{{"role", "user"}, {"content", prompt}}});
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
      continue;  // one retry on transport failure
    }
    if (res->status != 200) {
      throw ReasonerError("reasoner endpoint returned HTTP " + std::to_string(res->status));
    }
    try {
      auto parsed = nlohmann::json::parse(res->body);
      return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ReasonerError(std::string("malformed chat-completion response: ") + e.what());
    }
  }
  throw ReasonerError("reasoner transport failed after retry: " + last_error);
}

ReasonerResponse HttpReasoner::complete(const ReasonerRequest& req) {
  return {post_chat(build_prompt(req))};
}

}  // namespace guardrail
