#pragma once
// Deterministic household micro-simulator plus guardrail-independent ground
// truth: a contextual hazard oracle over post-step snapshots and a temporal
// conformance oracle over executed trajectories. Scenario files are JSON
// documents (docs/scenario-schema.md).

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "guardrail/core.hpp"
#include "guardrail/dsl.hpp"
#include "guardrail/json_io.hpp"
#include "guardrail/reasoner.hpp"
#include "guardrail/temporal.hpp"

namespace guardrail::sim {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct WorldState {
  std::map<std::string, SceneObject> objects;  // instance_id -> object
  std::string agent_location;
  std::string held_instance;  // instance id, "" = hands free
  int clock = 0;

  Observation observe() const;
  const SceneObject* find_by_name(const std::string& name) const;
  SceneObject* find_by_name_mutable(const std::string& name);
  std::string container_of(const std::string& instance_id) const;
};

struct HazardRule {
  std::string tag;
  std::string source;  // predicate DSL, evaluated by the oracle only
  dsl::ExprPtr expr;
};

struct Scenario {
  std::string id;
  InstructionCategory category = InstructionCategory::safe;
  Instruction instruction;
  std::string counterpart_id;  // jailbreak twin of a contextual scenario
  WorldState initial_world;
  std::vector<ActionProposal> plan;  // the scripted black-box agent's plan
  std::vector<HazardRule> hazard_rules;
  std::vector<TemporalPredicate> temporal_constraints;  // ground truth for SPR
  std::vector<std::string> expected_hazard_tags;
  std::map<RequestKind, std::vector<std::string>> script;  // scripted-reasoner envelopes
  std::optional<int> seed_step;  // marks a training example for seeding
};

Scenario scenario_from_json(const ordered_json& doc, const std::string& source_name);
Scenario load_scenario(const std::string& path);
// All *.json scenarios in a directory, sorted by id.
std::vector<Scenario> load_scenario_dir(const std::string& dir);

// Validates invariants (unique instances, acyclic containment, resolvable
// containment/held references) and returns the starting world + observation.
std::pair<WorldState, Observation> reset(const Scenario& sc);

struct ExecutionOutcome {
  bool ok = false;
  std::string failure;  // modeled outcome, not an exception path
};

// Deterministic transition table; precondition failures leave the world
// unchanged. `a` must be normalized.
ExecutionOutcome step(WorldState& w, const ActionProposal& a);

// One executed (or blocked) step with the snapshot taken after it.
struct TrajectoryStep {
  int step_index = 0;
  ActionProposal action;
  bool executed = false;
  Observation post_observation;
};

struct HazardEvent {
  std::string tag;
  int step_index = 0;  // first step whose post-state satisfied the rule
  std::string rule_source;
};

// Evaluates every hazard rule against every executed step's post-state;
// reports the first firing per rule. Consumes only the executed trajectory
// and scenario ground truth — never guardrail verdicts.
std::vector<HazardEvent> hazard_oracle(std::span<const TrajectoryStep> trajectory,
                                       const Scenario& sc);

struct TemporalOracleResult {
  bool conform = true;
  std::vector<ViolationReport> violations;
};

// Brute-force full-trajectory conformance check of ground-truth temporal
// predicates, implemented independently of the incremental engine:
//  - prerequisite: every executed trigger has an executed response earlier;
//  - obligation: every executed trigger at i has an executed response at
//    s in (i, i+window];
//  - adjacency: the next executed action after a trigger is its response.
TemporalOracleResult temporal_oracle(std::span<const TrajectoryStep> trajectory,
                                     std::span<const TemporalPredicate> constraints);

}  // namespace guardrail::sim
