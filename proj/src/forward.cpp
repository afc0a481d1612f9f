#include "guardrail/forward.hpp"

#include "guardrail/log.hpp"

namespace guardrail {

namespace {

Observation filter_profile_keys(Observation o, const EnvironmentProfile& profile) {
  for (SceneObject& obj : o.objects) {
    for (auto it = obj.states.begin(); it != obj.states.end();) {
      if (!profile.is_state_key(it->first)) {
        log::warn("dropping undeclared state key '" + it->first + "' on " + obj.name);
        it = obj.states.erase(it);
      } else {
        ++it;
      }
    }
    for (auto it = obj.materials.begin(); it != obj.materials.end();) {
      if (!profile.is_material_key(it->first)) {
        log::warn("dropping undeclared material key '" + it->first + "' on " + obj.name);
        it = obj.materials.erase(it);
      } else {
        ++it;
      }
    }
  }
  return o;
}

}  // namespace

Observation build_visual_prior(const Observation& raw, const EnvironmentProfile& profile) {
  if (!raw.held_object.empty() && raw.find_object(raw.held_object) == nullptr) {
    throw std::invalid_argument("observation invariant: held object '" + raw.held_object +
                                "' is not present in the scene");
  }
  return filter_profile_keys(raw, profile);
}

Observation build_visual_prior(const std::string& scene_payload, Reasoner& reasoner,
                               const EnvironmentProfile& profile) {
  ReasonerRequest req;
  req.kind = RequestKind::extract_objects;
  req.sections["scene"] = scene_payload;
  Observation o;
  o.objects = reasoner.extract_objects(req);
  return filter_profile_keys(std::move(o), profile);
}

QueryPair build_queries(const Observation& o, const Instruction& instruction,
                        const ShortTermMemory& m, const ActionProposal& a,
                        const TextEncoder& encoder) {
  QueryPair q;
  q.q_ctx = encoder.encode(
      context_key_text(o, instruction.text, serialize_trajectory(m.steps)));
  q.q_act = encoder.encode(action_text(a));
  return q;
}

ContextualLogic generate_contextual_logic(const Observation& o, const ActionProposal& a,
                                          const Instruction& instruction,
                                          const std::vector<ExperienceEntry>& retrieved,
                                          const ShortTermMemory& m, Reasoner& reasoner) {
  ReasonerRequest req;
  req.kind = RequestKind::contextual_logic;
  req.sections["instruction"] = instruction.text;
  req.sections["observation"] = serialize_observation(o);
  req.sections["observation_json"] = observation_to_json_text(o);
  req.sections["action"] = action_text(a);
  req.sections["trajectory"] = serialize_trajectory(m.steps);

  std::vector<DemonstrationRecord> demos;
  std::string demo_text;
  for (const ExperienceEntry& e : retrieved) {
    DemonstrationRecord d;
    d.entry_id = e.entry_id;
    d.label = to_string(e.label);
    d.reasoning = e.reasoning;
    d.predicates = e.predicates;
    demos.push_back(d);

    demo_text += "[" + d.label + "] " + e.reasoning + "\n";
    for (const auto& p : e.predicates) demo_text += "  " + p + "\n";
  }
  req.sections["demonstrations"] = demo_text;
  req.sections["demonstrations_json"] = demonstrations_to_json_text(demos);

  ContextualParts parts = reasoner.propose_contextual_logic(req);

  ContextualLogic logic;
  logic.reasoning = parts.reasoning;
  for (const ExperienceEntry& e : retrieved) logic.provenance.push_back(e.entry_id);
  for (const std::string& source : parts.predicate_sources) {
    try {
      dsl::ExprPtr expr = dsl::parse_predicate(source);
      logic.predicates.push_back({dsl::print_predicate(*expr), expr});
    } catch (const dsl::ParseError& e) {
      log::warn("dropping unparseable predicate from " + reasoner.name() + ": '" + source +
                "' (" + e.what() + ")");
    }
  }
  return logic;
}

ForwardVerdict verify_forward(const ActionProposal& a, const Observation& o,
                              const ContextualLogic& logic) {
  ForwardVerdict verdict;
  for (const ParsedPredicate& p : logic.predicates) {
    try {
      if (dsl::evaluate_predicate(*p.expr, a, o)) verdict.fired.push_back(p.source);
    } catch (const dsl::EvalError& e) {
      verdict.eval_errors.emplace_back(p.source, e.what());
    }
  }
  verdict.risk = !verdict.fired.empty();
  return verdict;
}

}  // namespace guardrail
