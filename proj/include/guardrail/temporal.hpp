#pragma once
// Backward reflective reasoning: the three-kind temporal predicate taxonomy
// (prerequisite / obligation / adjacency), live activation tracking over the
// episode trajectory, incremental violation detection and the episode-end
// sweep that drives corrective replanning.

#include <string>
#include <vector>

#include "guardrail/core.hpp"
#include "guardrail/memory.hpp"

namespace guardrail {

class Reasoner;  // reasoner.hpp

struct ActionPattern {
  std::string name;
  std::string target;  // "*" matches any target

  bool matches(const ActionProposal& a) const {
    return name == a.name && (target == "*" || target == a.target);
  }
  bool operator==(const ActionPattern& o) const { return name == o.name && target == o.target; }
  std::string text() const { return name + "(" + target + ")"; }
};

enum class TemporalKind { prerequisite, obligation, adjacency };

std::string to_string(TemporalKind k);
TemporalKind temporal_kind_from_string(std::string_view s);

// A temporal requirement: the trigger action opens the hazard, the response
// action closes it, the window bounds how many steps the response may lag.
//  - prerequisite: response must already have executed before the trigger is
//    permitted (window unused, stored as 0; lookback is the whole episode).
//  - obligation: response must execute at step s, triggered_at < s <=
//    triggered_at + window (window >= 1).
//  - adjacency: response must be the immediately next action (window = 0).
struct TemporalPredicate {
  std::string predicate_id;
  TemporalKind kind = TemporalKind::obligation;
  ActionPattern trigger;
  ActionPattern response;
  int window = 0;
};

enum class ActivationStatus { active, satisfied, violated };

std::string to_string(ActivationStatus s);

struct Activation {
  std::string predicate_id;
  int triggered_at = 0;
  ActivationStatus status = ActivationStatus::active;
};

struct ViolationReport {
  TemporalPredicate predicate;
  int triggered_at = 0;
  int detected_at = 0;  // >= triggered_at
  ActionPattern missing_response;
};

struct BackwardResult {
  bool risk = false;  // L^b value: disjunction over active temporal predicates
  std::vector<ViolationReport> reports;
};

// Enforces type invariants on reasoner-proposed predicates: adjacency windows
// coerced to 0, obligation windows raised to >= 1 (both logged), duplicates
// (same kind/trigger/response) merged keeping the smaller window, unknown
// verbs dropped. Assigns sequential predicate ids.
std::vector<TemporalPredicate> normalize_temporal_set(
    std::vector<TemporalPredicate> proposed,
    const EnvironmentProfile& profile = EnvironmentProfile::household());

// Asks the reasoner to decompose the instruction into temporal predicates and
// normalizes the result. Reasoner failures propagate.
std::vector<TemporalPredicate> infer_temporal_predicates(
    const Instruction& instruction, Reasoner& reasoner,
    const EnvironmentProfile& profile = EnvironmentProfile::household());

// Per-episode activation table plus incremental verification. Single-threaded
// by contract; verify() is read-only over the trajectory but advances
// activation statuses (active -> satisfied only; violated is assigned by
// seal() so a replan-corrected activation can still end satisfied).
class TemporalEngine {
 public:
  explicit TemporalEngine(std::vector<TemporalPredicate> predicates = {});

  const std::vector<TemporalPredicate>& predicates() const { return predicates_; }
  const std::vector<Activation>& activations() const { return activations_; }

  // Registers fresh activations for every obligation/adjacency predicate
  // whose trigger matches an action that actually executed at step t.
  // Prerequisites never activate; they are checked at proposal time.
  std::vector<Activation> register_triggers(const ActionProposal& executed, int t);

  // L^b for the action proposed at step t, given the trajectory so far.
  // Reports every violated predicate; repeated calls past an unmet deadline
  // keep reporting until the response lands (mirroring a from-scratch scan).
  BackwardResult verify(const ActionProposal& proposed, int t, const ShortTermMemory& m);

  // Episode-end sweep: reports every still-pending obligation/adjacency so
  // the orchestrator can insert corrective actions before accepting done.
  // Call repeatedly as correctives execute; converges to empty.
  std::vector<ViolationReport> finalize(const ShortTermMemory& m, int t);

  // Marks activations that never got their response as violated (episode
  // report time). Active -> violated is the only transition made here.
  void seal();

 private:
  const TemporalPredicate* find_predicate(const std::string& id) const;
  void scan_satisfactions(const ShortTermMemory& m);

  std::vector<TemporalPredicate> predicates_;
  std::vector<Activation> activations_;
};

}  // namespace guardrail
