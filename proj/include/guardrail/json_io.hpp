#pragma once
// JSON conversions for core types, shared by memory persistence, scenario
// loading, reasoner payloads and report writers. ordered_json keeps field
// order stable so emitted files are byte-reproducible.

#include <nlohmann/json.hpp>

#include "guardrail/core.hpp"

namespace guardrail {

using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const SceneObject& obj);
SceneObject scene_object_from_json(const ordered_json& j);

ordered_json to_json(const Observation& o);
Observation observation_from_json(const ordered_json& j);

ordered_json to_json(const ActionProposal& a);
ActionProposal action_from_json(const ordered_json& j);

}  // namespace guardrail
