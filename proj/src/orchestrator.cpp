#include "guardrail/orchestrator.hpp"

#include <algorithm>
#include <sstream>

#include "guardrail/log.hpp"

namespace guardrail {

namespace {

std::string violation_key(const ViolationReport& r) {
  return r.predicate.predicate_id + "@" + std::to_string(r.triggered_at);
}

std::string violation_text(const ViolationReport& r) {
  std::ostringstream out;
  out << to_string(r.predicate.kind) << " " << r.predicate.predicate_id
      << " trigger=" << r.predicate.trigger.text()
      << " missing_response=" << r.missing_response.text()
      << " triggered_at=" << r.triggered_at << " detected_at=" << r.detected_at;
  return out.str();
}

}  // namespace

Session::Session(Instruction instruction, Reasoner& reasoner, LongTermMemory& memory,
                 const TextEncoder& encoder, GuardrailConfig config,
                 const EnvironmentProfile& profile)
    : instruction_(std::move(instruction)),
      reasoner_(&reasoner),
      memory_(&memory),
      encoder_(&encoder),
      profile_(&profile),
      config_(config) {
  short_term_.instruction = instruction_;
  std::vector<std::string> captured;
  {
    log::ScopedSink capture([&captured](const std::string& m) { captured.push_back(m); });
    try {
      engine_ = TemporalEngine(infer_temporal_predicates(instruction_, *reasoner_, *profile_));
    } catch (const ReasonerError& e) {
      if (config_.fail_closed) throw;
      captured.push_back(std::string("temporal inference unavailable, starting with an empty "
                                     "predicate set (fail-open): ") + e.what());
    } catch (const EnvelopeError& e) {
      if (config_.fail_closed) throw;
      captured.push_back(std::string("temporal inference returned a malformed envelope, "
                                     "starting empty (fail-open): ") + e.what());
    }
  }
  for (const auto& w : captured) warnings_.push_back(w);
}

bool Session::violation_in_flight(const ViolationReport& r) const {
  std::string key = violation_key(r);
  for (const auto& frame : replan_stack_) {
    if (std::find(frame.violation_keys.begin(), frame.violation_keys.end(), key) !=
        frame.violation_keys.end()) {
      return true;
    }
  }
  return false;
}

Verdict Session::make_replan_verdict(const std::vector<ViolationReport>& reports,
                                     const Observation& o,
                                     std::vector<std::string>& step_warnings) {
  Verdict verdict;
  verdict.kind = VerdictKind::replan;
  verdict.violations = reports;
  for (const ViolationReport& r : reports) {
    ReasonerRequest req;
    req.kind = RequestKind::replan_sequence;
    req.sections["violation"] = violation_text(r);
    req.sections["response_name"] = r.missing_response.name;
    req.sections["response_target"] = r.missing_response.target;
    req.sections["trigger_target"] = r.predicate.trigger.target;
    req.sections["location"] = o.agent_location;
    req.sections["observation_json"] = observation_to_json_text(o);

    std::vector<std::string> captured;
    std::vector<ActionProposal> steps;
    {
      log::ScopedSink capture([&captured](const std::string& m) { captured.push_back(m); });
      steps = reasoner_->propose_replan_sequence(req);
    }
    for (auto& w : captured) step_warnings.push_back(std::move(w));
    for (ActionProposal& s : steps) verdict.corrective.push_back(std::move(s));
  }
  std::ostringstream why;
  why << "temporal violation: ";
  for (size_t i = 0; i < reports.size(); ++i) {
    if (i > 0) why << "; ";
    why << violation_text(reports[i]);
  }
  verdict.reasoning = why.str();
  return verdict;
}

Verdict Session::verify_step(const ActionProposal& a, const Observation& o) {
  if (a.step_index != static_cast<int>(short_term_.steps.size())) {
    throw std::invalid_argument("verify_step: step_index " + std::to_string(a.step_index) +
                                " is not the next step (" +
                                std::to_string(short_term_.steps.size()) + ")");
  }
  PendingStep pending;
  pending.action = a;
  std::vector<std::string> step_warnings;

  {
    log::ScopedSink capture([&step_warnings](const std::string& m) { step_warnings.push_back(m); });
    pending.observation = build_visual_prior(o, *profile_);
  }
  const Observation& prior = pending.observation;
  const int t = a.step_index;

  // Backward reflective pass (runs first; replan outranks block).
  BackwardResult backward = engine_.verify(a, t, short_term_);
  std::vector<ViolationReport> actionable;
  for (const ViolationReport& r : backward.reports) {
    if (!violation_in_flight(r)) actionable.push_back(r);
  }
  pending.backward_risk = !actionable.empty();

  bool run_forward = actionable.empty() || config_.audit_forward_always;
  bool forward_for_decision = actionable.empty();

  if (run_forward) {
    try {
      QueryPair q = build_queries(prior, instruction_, short_term_, a, *encoder_);
      std::vector<ExperienceEntry> retrieved =
          memory_->retrieve(q.q_ctx, q.q_act, config_.retrieval);
      ContextualLogic logic;
      {
        log::ScopedSink capture(
            [&step_warnings](const std::string& m) { step_warnings.push_back(m); });
        logic = generate_contextual_logic(prior, a, instruction_, retrieved, short_term_,
                                          *reasoner_);
      }
      ForwardVerdict fv = verify_forward(a, prior, logic);
      pending.forward_risk = fv.risk;
      pending.eval_errors = fv.eval_errors;
      if (forward_for_decision) {
        // Only a decision-path forward run feeds the step's memory candidate.
        pending.logic = std::move(logic);
        pending.logic_valid = true;
      }
      if (forward_for_decision && fv.risk) {
        pending.verdict.kind = VerdictKind::block;
        pending.verdict.fired = fv.fired;
        pending.verdict.reasoning = pending.logic.reasoning;
        pending.verdict.provenance = pending.logic.provenance;
      } else if (!forward_for_decision && fv.risk) {
        pending.verdict.fired = fv.fired;  // audit visibility only
      }
    } catch (const ReasonerError& e) {
      if (config_.fail_closed && forward_for_decision) {
        pending.verdict.kind = VerdictKind::block;
        pending.verdict.policy_note = "reasoner-unavailable (fail-closed)";
        pending.verdict.reasoning = e.what();
        step_warnings.push_back(std::string("forward reasoning unavailable, blocking "
                                            "(fail-closed): ") + e.what());
      } else {
        step_warnings.push_back(std::string("forward reasoning unavailable, allowing "
                                            "(fail-open): ") + e.what());
      }
    } catch (const EnvelopeError& e) {
      if (config_.fail_closed && forward_for_decision) {
        pending.verdict.kind = VerdictKind::block;
        pending.verdict.policy_note = "reasoner-malformed-output (fail-closed)";
        pending.verdict.reasoning = e.what();
        step_warnings.push_back(std::string("forward reasoning output malformed, blocking "
                                            "(fail-closed): ") + e.what());
      } else {
        step_warnings.push_back(std::string("forward reasoning output malformed, allowing "
                                            "(fail-open): ") + e.what());
      }
    }
  }

  if (!actionable.empty()) {
    pending.verdict = make_replan_verdict(actionable, prior, step_warnings);
  }

  pending.warnings = std::move(step_warnings);
  Verdict verdict = pending.verdict;
  pending_ = std::move(pending);
  return verdict;
}

void Session::commit_step(const ActionProposal& a, bool executed, const Observation&) {
  if (!pending_ || !(pending_->action == a) ||
      pending_->action.step_index != a.step_index) {
    throw std::logic_error("commit_step: no matching verify_step is pending");
  }
  PendingStep pending = std::move(*pending_);
  pending_.reset();

  const Verdict& verdict = pending.verdict;
  if (verdict.kind != VerdictKind::allow && executed) {
    throw std::logic_error("commit_step: blocked/replanned action cannot be executed");
  }

  std::string trajectory_before = serialize_trajectory(short_term_.steps);

  StepRecord rec;
  rec.step_index = a.step_index;
  rec.action = a;
  rec.observation_before = pending.observation;
  rec.verdict_kind = verdict.kind;
  rec.executed = executed;
  append_step(short_term_, rec);

  if (executed) engine_.register_triggers(a, a.step_index);

  StepAudit audit;
  audit.step_index = a.step_index;
  audit.proposal = a;
  audit.verdict = verdict.kind;
  audit.backward_risk = pending.backward_risk;
  audit.forward_risk = pending.forward_risk;
  audit.fired = verdict.kind == VerdictKind::block ? verdict.fired : pending.verdict.fired;
  audit.eval_errors = pending.eval_errors;
  for (const auto& v : verdict.violations) audit.violation_ids.push_back(violation_key(v));
  audit.executed = executed;
  audit.replan_depth = static_cast<int>(replan_stack_.size());
  audit.warnings = pending.warnings;

  // Replan bookkeeping: a replan verdict opens a frame; any other commit
  // consumes one corrective slot of the innermost frame and, when the frame
  // empties, surfaces the deferred action for restoration.
  if (verdict.kind == VerdictKind::replan) {
    push_frame(verdict, a);
    audit.replan_depth = static_cast<int>(replan_stack_.size());
    if (audit.replan_depth > config_.replan_depth_warn) {
      std::string w = "replan nesting depth " + std::to_string(audit.replan_depth) +
                      " exceeds " + std::to_string(config_.replan_depth_warn);
      audit.warnings.push_back(w);
      warnings_.push_back(w);
    }
    max_replan_depth_ = std::max(max_replan_depth_, audit.replan_depth);
  } else if (!replan_stack_.empty()) {
    ReplanFrame& top = replan_stack_.back();
    if (--top.remaining <= 0) {
      audit.restored = top.deferred;
      replan_stack_.pop_back();
    }
  }

  // Every step yields a long-term memory candidate; the error-free filter
  // decides admission.
  ExperienceEntry candidate;
  candidate.observation = pending.observation;
  candidate.action = a;
  candidate.instruction_text = instruction_.text;
  candidate.trajectory_snapshot = trajectory_before;
  if (pending.logic_valid) {
    candidate.reasoning = pending.logic.reasoning;
    for (const auto& p : pending.logic.predicates) candidate.predicates.push_back(p.source);
  } else if (verdict.kind == VerdictKind::replan) {
    candidate.reasoning = verdict.reasoning;
  }
  bool fired_any = verdict.kind == VerdictKind::block && !verdict.fired.empty();
  candidate.label = (verdict.kind == VerdictKind::block || fired_any)
                        ? ExperienceLabel::risky
                        : ExperienceLabel::benign;
  UpdateResult update = memory_->update(std::move(candidate), *encoder_);
  audit.memory_accepted = update.accepted;
  audit.memory_reject_reason = update.reason;

  for (const auto& w : audit.warnings) warnings_.push_back(w);
  log_.push_back(std::move(audit));
}

void Session::push_frame(const Verdict& verdict, const ActionProposal& deferred) {
  ReplanFrame frame;
  frame.remaining = static_cast<int>(verdict.corrective.size());
  frame.deferred = deferred;
  for (const auto& v : verdict.violations) frame.violation_keys.push_back(violation_key(v));
  replan_stack_.push_back(std::move(frame));
}

std::vector<Verdict> Session::finalize() {
  const int t = static_cast<int>(short_term_.steps.size());
  std::vector<ViolationReport> pending = engine_.finalize(short_term_, t);
  std::vector<Verdict> verdicts;
  Observation current;
  if (!short_term_.steps.empty()) current = short_term_.steps.back().observation_before;

  std::vector<ViolationReport> actionable;
  for (const ViolationReport& r : pending) {
    if (!violation_in_flight(r)) actionable.push_back(r);
  }
  for (const ViolationReport& r : actionable) {
    std::vector<std::string> sweep_warnings;
    Verdict v = make_replan_verdict({r}, current, sweep_warnings);
    for (auto& w : sweep_warnings) warnings_.push_back(std::move(w));
    verdicts.push_back(std::move(v));
  }
  // The innermost frame must correspond to the first verdict the harness will
  // execute, so frames are pushed in reverse.
  ActionProposal done;
  done.name = "done";
  for (auto it = verdicts.rbegin(); it != verdicts.rend(); ++it) {
    push_frame(*it, done);
  }
  return verdicts;
}

std::vector<StepAudit> Session::seal() {
  engine_.seal();
  return log_;
}

SeedShortfallError::SeedShortfallError(size_t accepted, size_t wanted,
                                       std::vector<std::string> rejects)
    : std::runtime_error("seed shortfall: accepted " + std::to_string(accepted) + " of " +
                         std::to_string(wanted) + " requested entries"),
      accepted(accepted),
      wanted(wanted),
      rejects(std::move(rejects)) {}

std::vector<ExperienceEntry> generate_seed_memory(const std::vector<SeedExample>& examples,
                                                  Reasoner& reasoner, size_t count,
                                                  LongTermMemory& memory,
                                                  const TextEncoder& encoder) {
  std::vector<std::string> accepted_ids;
  std::vector<std::string> rejects;
  size_t index = 0;
  for (const SeedExample& ex : examples) {
    if (accepted_ids.size() >= count) break;
    ++index;
    ContextualLogic logic =
        generate_contextual_logic(ex.observation, ex.action, ex.instruction, {}, ex.trajectory,
                                  reasoner);
    ExperienceEntry candidate;
    candidate.observation = ex.observation;
    candidate.action = ex.action;
    candidate.instruction_text = ex.instruction.text;
    candidate.trajectory_snapshot = serialize_trajectory(ex.trajectory.steps);
    candidate.reasoning = logic.reasoning;
    bool fired = false;
    for (const auto& p : logic.predicates) {
      candidate.predicates.push_back(p.source);
      try {
        if (dsl::evaluate_predicate(*p.expr, ex.action, ex.observation)) fired = true;
      } catch (const dsl::EvalError&) {
        // update() rejects the candidate below and reports the reason.
      }
    }
    candidate.label = fired ? ExperienceLabel::risky : ExperienceLabel::benign;
    UpdateResult result = memory.update(std::move(candidate), encoder);
    if (result.accepted) {
      accepted_ids.push_back(result.entry_id);
    } else {
      rejects.push_back("example " + std::to_string(index) + ": " + result.reason);
    }
  }
  if (accepted_ids.size() < count) {
    throw SeedShortfallError(accepted_ids.size(), count, rejects);
  }
  std::vector<ExperienceEntry> out;
  for (const ExperienceEntry& e : memory.snapshot()) {
    if (std::find(accepted_ids.begin(), accepted_ids.end(), e.entry_id) != accepted_ids.end()) {
      out.push_back(e);
    }
  }
  return out;
}

}  // namespace guardrail
