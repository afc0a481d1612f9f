#pragma once
// Core domain types shared by every module, plus the canonical deterministic
// text serialization used to build retrieval queries. The exact templates are
// part of the retrieval contract and documented in docs/serialization.md.

#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace guardrail {

enum class InstructionCategory { contextual_unsafe, temporal_unsafe, safe, jailbreak };

std::string to_string(InstructionCategory c);
InstructionCategory category_from_string(std::string_view s);

// High-level task instruction. `category` is harness metadata; the guardrail
// never reads it.
struct Instruction {
  std::string text;
  InstructionCategory category = InstructionCategory::safe;
};

struct ActionProposal {
  std::string name;      // canonical verb from the profile vocabulary
  std::string target;    // object token, empty for verbs like wait/done
  std::string argument;  // optional secondary object (put destination, pour target)
  int step_index = 0;

  bool operator==(const ActionProposal& o) const {
    return name == o.name && target == o.target && argument == o.argument;
  }
};

using StateValue = std::variant<bool, double>;

struct SceneObject {
  std::string name;
  std::string instance_id;
  std::map<std::string, StateValue> states;    // isOn, isOpen, ...
  std::map<std::string, bool> materials;       // isMetal, isSharp, ...
  std::vector<std::string> contains;           // instance ids held inside/on this object
};

struct Observation {
  std::vector<SceneObject> objects;
  std::string held_object;     // object type token, empty = hands free
  std::string agent_location;  // empty = unknown
  int timestep = 0;

  const SceneObject* find_object(std::string_view name) const;
  const SceneObject* find_instance(std::string_view instance_id) const;
};

enum class VerdictKind { allow, block, replan };

std::string to_string(VerdictKind k);

struct StepRecord {
  int step_index = 0;
  ActionProposal action;
  Observation observation_before;
  VerdictKind verdict_kind = VerdictKind::allow;
  bool executed = false;  // always false for blocked steps
};

struct UnknownVerbError : std::runtime_error {
  explicit UnknownVerbError(const std::string& verb)
      : std::runtime_error("unknown verb: " + verb), verb(verb) {}
  std::string verb;
};

// Closed action vocabulary plus declared state/material keys for one
// environment. Everything downstream (normalization, DSL access checks,
// simulator, reasoner validation) works against one profile.
class EnvironmentProfile {
 public:
  EnvironmentProfile(std::vector<std::string> actions,
                     std::map<std::string, std::string> synonyms,
                     std::set<std::string> state_keys,
                     std::set<std::string> material_keys,
                     int embedding_dim);

  static const EnvironmentProfile& household();

  bool has_action(std::string_view name) const;
  bool is_state_key(std::string_view key) const;
  bool is_material_key(std::string_view key) const;
  const std::vector<std::string>& actions() const { return actions_; }
  const std::map<std::string, std::string>& synonyms() const { return synonyms_; }
  int embedding_dim() const { return embedding_dim_; }

 private:
  std::vector<std::string> actions_;
  std::map<std::string, std::string> synonyms_;
  std::set<std::string> state_keys_;
  std::set<std::string> material_keys_;
  int embedding_dim_;
};

// Lowercases, collapses whitespace, applies the profile synonym table and
// strips instance suffixes from targets ("Microwave_1" -> "microwave").
// Throws UnknownVerbError when the verb is not in the closed vocabulary.
// Idempotent: normalizing an already-normalized proposal is a no-op.
ActionProposal normalize_action(std::string_view raw_name, std::string_view raw_target,
                                std::string_view raw_argument = {},
                                const EnvironmentProfile& profile = EnvironmentProfile::household());

// Canonical action text "name(target)" / "name(target,argument)"; the q_act
// encoding input and the trajectory clause body.
std::string action_text(const ActionProposal& a);

// Deterministic scene text: objects sorted by (name, instance_id), each
// rendered name[states;materials](contains:...), ego state appended last.
std::string serialize_observation(const Observation& o);

// One clause per step: "t{i}:name(target)", blocked steps get a "blocked:"
// prefix, clauses joined by single spaces.
std::string serialize_trajectory(std::span<const StepRecord> steps);

// Shared scalar formatting (shortest round-trip form, "1" not "1.000000").
std::string format_number(double v);

std::string to_lower(std::string_view s);

}  // namespace guardrail
