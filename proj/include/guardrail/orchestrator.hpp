#pragma once
// The guardrail orchestrator: per-episode session state, the
// backward-then-forward decision for each proposed action, safety actions
// (block / replan with context restoration), memory commits through the
// error-free filter, the episode-end obligation sweep and seed-memory
// generation.

#include <optional>
#include <string>
#include <vector>

#include "guardrail/core.hpp"
#include "guardrail/forward.hpp"
#include "guardrail/memory.hpp"
#include "guardrail/reasoner.hpp"
#include "guardrail/temporal.hpp"

namespace guardrail {

struct GuardrailConfig {
  RetrievalConfig retrieval;
  bool fail_closed = false;          // block (and refuse episodes) on reasoner outage
  bool audit_forward_always = false; // evaluate L^f for logging even when backward fired
  int replan_depth_warn = 2;         // flag replan nesting deeper than this
};

struct Verdict {
  VerdictKind kind = VerdictKind::allow;
  // block: at least one fired predicate unless policy_note marks a
  // fail-closed outage block
  std::vector<std::string> fired;
  std::string reasoning;
  std::vector<std::string> provenance;
  std::string policy_note;
  // replan: every violated predicate plus a corrective sequence containing
  // each missing response
  std::vector<ViolationReport> violations;
  std::vector<ActionProposal> corrective;
};

// One row of the episode log, enough to recompute every metric offline.
struct StepAudit {
  int step_index = 0;
  ActionProposal proposal;
  VerdictKind verdict = VerdictKind::allow;
  bool backward_risk = false;                 // L^b
  std::optional<bool> forward_risk;           // L^f (absent when skipped)
  std::vector<std::string> fired;
  std::vector<std::pair<std::string, std::string>> eval_errors;
  std::vector<std::string> violation_ids;     // "psi_k@triggered_at"
  bool executed = false;
  bool memory_accepted = false;
  std::string memory_reject_reason;
  int replan_depth = 0;
  std::optional<ActionProposal> restored;     // deferred action due next, set when a
                                              // corrective sequence completes
  std::vector<std::string> warnings;
};

// Per-episode guardrail state. Single-threaded; multiple sessions may share
// one LongTermMemory under its single-writer contract.
class Session {
 public:
  // begin_episode: infers the temporal predicate set from the instruction.
  // Reasoner failure refuses the episode under fail_closed, otherwise starts
  // with an empty set and a warning.
  Session(Instruction instruction, Reasoner& reasoner, LongTermMemory& memory,
          const TextEncoder& encoder, GuardrailConfig config = {},
          const EnvironmentProfile& profile = EnvironmentProfile::household());

  // Backward first (violations => replan with corrective sequence), then
  // forward (fired predicates => block), else allow. a.step_index must be the
  // next step.
  Verdict verify_step(const ActionProposal& a, const Observation& o);

  // Records the step in short-term memory, registers temporal triggers for
  // executed actions, advances replan bookkeeping and submits the step's
  // experience candidate to long-term memory.
  void commit_step(const ActionProposal& a, bool executed, const Observation& o_next);

  // Episode-end sweep: one replan verdict per still-pending activation.
  // Execute the correctives (through verify/commit) and call again; returns
  // empty when the episode can accept done.
  std::vector<Verdict> finalize();

  // Marks never-satisfied activations violated and returns the log.
  std::vector<StepAudit> seal();

  const ShortTermMemory& short_term() const { return short_term_; }
  const std::vector<TemporalPredicate>& temporal_set() const { return engine_.predicates(); }
  const std::vector<Activation>& activations() const { return engine_.activations(); }
  const std::vector<StepAudit>& log() const { return log_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  int replan_depth() const { return static_cast<int>(replan_stack_.size()); }
  int max_replan_depth_seen() const { return max_replan_depth_; }
  const Instruction& instruction() const { return instruction_; }

 private:
  struct ReplanFrame {
    int remaining = 0;
    ActionProposal deferred;
    std::vector<std::string> violation_keys;  // "psi_k@triggered_at"
  };

  Verdict make_replan_verdict(const std::vector<ViolationReport>& reports,
                              const Observation& o, std::vector<std::string>& step_warnings);
  bool violation_in_flight(const ViolationReport& r) const;
  void push_frame(const Verdict& verdict, const ActionProposal& deferred);

  Instruction instruction_;
  Reasoner* reasoner_;
  LongTermMemory* memory_;
  const TextEncoder* encoder_;
  const EnvironmentProfile* profile_;
  GuardrailConfig config_;

  TemporalEngine engine_;
  ShortTermMemory short_term_;
  std::vector<ReplanFrame> replan_stack_;
  int max_replan_depth_ = 0;

  struct PendingStep {
    ActionProposal action;
    Observation observation;
    Verdict verdict;
    ContextualLogic logic;
    bool logic_valid = false;
    std::vector<std::string> warnings;
    std::vector<std::pair<std::string, std::string>> eval_errors;
    std::optional<bool> forward_risk;
    bool backward_risk = false;
  };
  std::optional<PendingStep> pending_;

  std::vector<StepAudit> log_;
  std::vector<std::string> warnings_;
};

struct SeedExample {
  Instruction instruction;
  Observation observation;
  ActionProposal action;
  ShortTermMemory trajectory;
};

struct SeedShortfallError : std::runtime_error {
  SeedShortfallError(size_t accepted, size_t wanted, std::vector<std::string> rejects);
  size_t accepted;
  size_t wanted;
  std::vector<std::string> rejects;
};

// Generates (reasoning, predicates) for each example via the reasoner and
// admits entries through the error-free filter until exactly `count` are
// accepted. Throws SeedShortfallError (listing every rejection) when the
// examples run out first. Labels follow the memory rule: risky iff any
// generated predicate fires against the example's own context.
std::vector<ExperienceEntry> generate_seed_memory(const std::vector<SeedExample>& examples,
                                                  Reasoner& reasoner, size_t count,
                                                  LongTermMemory& memory,
                                                  const TextEncoder& encoder);

}  // namespace guardrail
