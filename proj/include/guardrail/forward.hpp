#pragma once
// Forward predictive reasoning: visual-prior construction, multi-grained
// query building, contextual-logic generation through the reasoner and the
// L^f risk disjunction over the generated predicates.

#include <string>
#include <vector>

#include "guardrail/core.hpp"
#include "guardrail/dsl.hpp"
#include "guardrail/encoder.hpp"
#include "guardrail/memory.hpp"
#include "guardrail/reasoner.hpp"

namespace guardrail {

struct ParsedPredicate {
  std::string source;  // canonical printed form
  dsl::ExprPtr expr;
};

// Reasoning demonstration plus the executable predicates generated for one
// proposed action, with provenance back to the retrieved experiences.
struct ContextualLogic {
  std::string reasoning;
  std::vector<ParsedPredicate> predicates;
  std::vector<std::string> provenance;  // entry ids handed to the reasoner
};

struct ForwardVerdict {
  bool risk = false;                                        // L^f value
  std::vector<std::string> fired;                           // sources evaluated true
  std::vector<std::pair<std::string, std::string>> eval_errors;  // (source, error)
};

struct QueryPair {
  EmbeddingVector q_ctx;
  EmbeddingVector q_act;
};

// Structured path: validates the observation against the profile (unknown
// state/material keys dropped with a warning, held-object invariant checked).
Observation build_visual_prior(const Observation& raw,
                               const EnvironmentProfile& profile = EnvironmentProfile::household());

// Image-handle path: the scene payload is opaque text the reasoner turns
// into object records; unknown keys are dropped the same way. An empty
// extraction is a valid (empty) scene.
Observation build_visual_prior(const std::string& scene_payload, Reasoner& reasoner,
                               const EnvironmentProfile& profile = EnvironmentProfile::household());

// q_ctx = encode("<obs> | <instruction> | <trajectory>"), q_act =
// encode("name(target)"). Templates documented in docs/serialization.md.
QueryPair build_queries(const Observation& o, const Instruction& instruction,
                        const ShortTermMemory& m, const ActionProposal& a,
                        const TextEncoder& encoder);

// Prompts the reasoner with the retrieved entries as in-context
// demonstrations. Unparseable predicate sources are dropped (logged), never
// evaluated; an empty predicate set means no contextual risk hypothesis.
ContextualLogic generate_contextual_logic(const Observation& o, const ActionProposal& a,
                                          const Instruction& instruction,
                                          const std::vector<ExperienceEntry>& retrieved,
                                          const ShortTermMemory& m, Reasoner& reasoner);

// L^f: OR over successful predicate evaluations. Eval errors are collected
// separately and excluded from the disjunction — a broken predicate is not
// evidence of hazard, but it does disqualify the step's memory candidate.
ForwardVerdict verify_forward(const ActionProposal& a, const Observation& o,
                              const ContextualLogic& logic);

}  // namespace guardrail
