#include "guardrail/temporal.hpp"

#include <algorithm>
#include <map>

#include "guardrail/log.hpp"
#include "guardrail/reasoner.hpp"

namespace guardrail {

std::string to_string(TemporalKind k) {
  switch (k) {
    case TemporalKind::prerequisite: return "prerequisite";
    case TemporalKind::obligation: return "obligation";
    case TemporalKind::adjacency: return "adjacency";
  }
  return "obligation";
}

TemporalKind temporal_kind_from_string(std::string_view s) {
  if (s == "prerequisite") return TemporalKind::prerequisite;
  if (s == "obligation") return TemporalKind::obligation;
  if (s == "adjacency") return TemporalKind::adjacency;
  throw std::invalid_argument("unknown temporal predicate kind: " + std::string(s));
}

std::string to_string(ActivationStatus s) {
  switch (s) {
    case ActivationStatus::active: return "active";
    case ActivationStatus::satisfied: return "satisfied";
    case ActivationStatus::violated: return "violated";
  }
  return "active";
}

std::vector<TemporalPredicate> normalize_temporal_set(std::vector<TemporalPredicate> proposed,
                                                      const EnvironmentProfile& profile) {
  std::vector<TemporalPredicate> out;
  for (TemporalPredicate& p : proposed) {
    if (!profile.has_action(p.trigger.name) || !profile.has_action(p.response.name)) {
      log::warn("temporal predicate dropped: unknown verb in " + p.trigger.text() + " -> " +
                p.response.text());
      continue;
    }
    if (p.trigger.target.empty()) p.trigger.target = "*";
    if (p.response.target.empty()) p.response.target = "*";
    if (p.kind == TemporalKind::adjacency && p.window != 0) {
      log::warn("adjacency predicate " + p.trigger.text() + " window coerced from " +
                std::to_string(p.window) + " to 0");
      p.window = 0;
    }
    if (p.kind == TemporalKind::prerequisite) p.window = 0;
    if (p.kind == TemporalKind::obligation && p.window < 1) {
      log::warn("obligation predicate " + p.trigger.text() + " window raised from " +
                std::to_string(p.window) + " to 1");
      p.window = 1;
    }

    auto same = std::find_if(out.begin(), out.end(), [&p](const TemporalPredicate& q) {
      return q.kind == p.kind && q.trigger == p.trigger && q.response == p.response;
    });
    if (same != out.end()) {
      same->window = std::min(same->window, p.window);
      continue;
    }
    out.push_back(std::move(p));
  }
  for (size_t i = 0; i < out.size(); ++i) out[i].predicate_id = "psi_" + std::to_string(i);
  return out;
}

std::vector<TemporalPredicate> infer_temporal_predicates(const Instruction& instruction,
                                                         Reasoner& reasoner,
                                                         const EnvironmentProfile& profile) {
  ReasonerRequest req;
  req.kind = RequestKind::temporal_predicates;
  req.sections["instruction"] = instruction.text;
  std::vector<TemporalRecord> records = reasoner.propose_temporal_predicates(req);

  std::vector<TemporalPredicate> proposed;
  for (const TemporalRecord& r : records) {
    TemporalPredicate p;
    try {
      p.kind = temporal_kind_from_string(r.kind);
    } catch (const std::invalid_argument& e) {
      log::warn(std::string("temporal record dropped: ") + e.what());
      continue;
    }
    p.trigger = {r.trigger_name, r.trigger_target};
    p.response = {r.response_name, r.response_target};
    p.window = r.window;
    if (p.trigger.name.empty() || p.response.name.empty()) {
      log::warn("temporal record dropped: missing trigger or response action");
      continue;
    }
    proposed.push_back(std::move(p));
  }
  return normalize_temporal_set(std::move(proposed), profile);
}

TemporalEngine::TemporalEngine(std::vector<TemporalPredicate> predicates)
    : predicates_(std::move(predicates)) {}

const TemporalPredicate* TemporalEngine::find_predicate(const std::string& id) const {
  for (const auto& p : predicates_) {
    if (p.predicate_id == id) return &p;
  }
  return nullptr;
}

std::vector<Activation> TemporalEngine::register_triggers(const ActionProposal& executed, int t) {
  std::vector<Activation> fresh;
  for (const auto& p : predicates_) {
    if (p.kind == TemporalKind::prerequisite) continue;
    if (!p.trigger.matches(executed)) continue;
    Activation a;
    a.predicate_id = p.predicate_id;
    a.triggered_at = t;
    fresh.push_back(a);
    activations_.push_back(a);
  }
  return fresh;
}

void TemporalEngine::scan_satisfactions(const ShortTermMemory& m) {
  for (Activation& act : activations_) {
    if (act.status != ActivationStatus::active) continue;
    const TemporalPredicate* p = find_predicate(act.predicate_id);
    if (p == nullptr) continue;
    if (p->kind == TemporalKind::adjacency) {
      // Only the immediately next executed action can satisfy an adjacency.
      size_t next = static_cast<size_t>(act.triggered_at) + 1;
      if (next < m.steps.size() && m.steps[next].executed &&
          p->response.matches(m.steps[next].action)) {
        act.status = ActivationStatus::satisfied;
      }
    } else {
      // Obligations accept any later executed response, even one inserted by
      // replanning after the deadline: (triggered_at, now) is open-ended so a
      // corrected hazard stops reporting.
      for (const StepRecord& rec : m.steps) {
        if (rec.step_index <= act.triggered_at) continue;
        if (rec.executed && p->response.matches(rec.action)) {
          act.status = ActivationStatus::satisfied;
          break;
        }
      }
    }
  }
}

BackwardResult TemporalEngine::verify(const ActionProposal& proposed, int t,
                                      const ShortTermMemory& m) {
  scan_satisfactions(m);

  BackwardResult result;
  // (a) prerequisite: proposed is a guarded trigger and the required response
  // never executed anywhere earlier in the episode.
  for (const auto& p : predicates_) {
    if (p.kind != TemporalKind::prerequisite) continue;
    if (!p.trigger.matches(proposed)) continue;
    bool satisfied = std::any_of(m.steps.begin(), m.steps.end(), [&p](const StepRecord& rec) {
      return rec.executed && p.response.matches(rec.action);
    });
    if (!satisfied) {
      result.reports.push_back({p, t, t, p.response});
    }
  }
  for (const Activation& act : activations_) {
    if (act.status != ActivationStatus::active) continue;
    const TemporalPredicate* p = find_predicate(act.predicate_id);
    if (p == nullptr) continue;
    if (p->kind == TemporalKind::adjacency) {
      // (b) the step right after the trigger must be the response.
      if (act.triggered_at == t - 1 && !p->response.matches(proposed)) {
        result.reports.push_back({*p, act.triggered_at, t, p->response});
      }
    } else if (p->kind == TemporalKind::obligation) {
      // (c) deadline passed with no response executed since the trigger.
      if (t - act.triggered_at > p->window) {
        result.reports.push_back({*p, act.triggered_at, t, p->response});
      }
    }
  }
  result.risk = !result.reports.empty();
  return result;
}

std::vector<ViolationReport> TemporalEngine::finalize(const ShortTermMemory& m, int t) {
  scan_satisfactions(m);
  std::vector<ViolationReport> pending;
  for (const Activation& act : activations_) {
    if (act.status != ActivationStatus::active) continue;
    const TemporalPredicate* p = find_predicate(act.predicate_id);
    if (p == nullptr) continue;
    pending.push_back({*p, act.triggered_at, t, p->response});
  }
  std::sort(pending.begin(), pending.end(), [](const ViolationReport& a, const ViolationReport& b) {
    if (a.triggered_at != b.triggered_at) return a.triggered_at < b.triggered_at;
    return a.predicate.predicate_id < b.predicate.predicate_id;
  });
  return pending;
}

void TemporalEngine::seal() {
  for (Activation& act : activations_) {
    if (act.status == ActivationStatus::active) act.status = ActivationStatus::violated;
  }
}

}  // namespace guardrail
