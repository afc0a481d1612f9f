#pragma once
// Text envelopes exchanged with reasoners. Every reasoner mode (mock,
// scripted, HTTP) produces raw envelope text and the shared parser here turns
// it into structures, so parsed output is always derived from raw text and
// parse failures surface identically everywhere. Formats are documented
// bit-exactly in docs/reasoner-protocol.md.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "guardrail/core.hpp"

namespace guardrail {

struct EnvelopeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Wire-level temporal predicate proposal (validated by the temporal module).
struct TemporalRecord {
  std::string kind;
  std::string trigger_name;
  std::string trigger_target;
  std::string response_name;
  std::string response_target;
  int window = 0;
};

struct ContextualParts {
  std::string reasoning;
  std::vector<std::string> predicate_sources;
};

// OBJECTS envelope <-> scene object records.
std::string render_objects_envelope(const std::vector<SceneObject>& objects);
std::vector<SceneObject> parse_objects_envelope(std::string_view text);

// REASONING / PREDICATES envelope.
std::string render_contextual_envelope(const std::string& reasoning,
                                       const std::vector<std::string>& predicates);
ContextualParts parse_contextual_envelope(std::string_view text);

// TEMPORAL envelope.
std::string render_temporal_envelope(const std::vector<TemporalRecord>& records);
std::vector<TemporalRecord> parse_temporal_envelope(std::string_view text);

// STEPS envelope; steps are "name(target)" / "name(target,argument)" lines.
std::string render_replan_envelope(const std::vector<ActionProposal>& steps);
std::vector<ActionProposal> parse_replan_envelope(std::string_view text);

// Parses "name(target)" / "name(target,argument)" / bare "name".
ActionProposal parse_action_text(std::string_view text);

}  // namespace guardrail
