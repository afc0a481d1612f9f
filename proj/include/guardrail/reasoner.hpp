#pragma once
// The guardrail-VLM boundary. One interface, three implementations:
//  - MockReasoner: deterministic rule tables (innate hazard patterns,
//    instruction-keyword temporal inference, in-context predicate transfer).
//  - ScriptedReasoner: scenario-supplied envelope responses consumed in order.
//  - HttpReasoner: chat-completion client over HTTP, provider-neutral wire
//    shape, prompt templates from assets/prompts/.
// Every mode produces raw envelope text; structures come from the shared
// envelope parser, so mock/scripted streams are bit-deterministic.

#include <deque>
#include <map>
#include <string>
#include <vector>

#include "guardrail/core.hpp"
#include "guardrail/envelope.hpp"

namespace guardrail {

enum class RequestKind { extract_objects, contextual_logic, temporal_predicates, replan_sequence };

std::string to_string(RequestKind k);

// Sections (by kind):
//  extract_objects:     scene
//  contextual_logic:    instruction, observation, observation_json, action,
//                       trajectory, demonstrations, demonstrations_json
//  temporal_predicates: instruction
//  replan_sequence:     violation, response_name, response_target, location,
//                       observation_json
struct ReasonerRequest {
  RequestKind kind = RequestKind::contextual_logic;
  std::map<std::string, std::string> sections;

  std::string section(const std::string& key) const {
    auto it = sections.find(key);
    return it == sections.end() ? std::string() : it->second;
  }
};

struct ReasonerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScriptExhaustedError : ReasonerError {
  using ReasonerError::ReasonerError;
};

struct ReasonerResponse {
  std::string raw;  // envelope text; parsed structures derive from this
};

class Reasoner {
 public:
  virtual ~Reasoner() = default;
  virtual std::string name() const = 0;

  // Raw envelope completion for one request. Transport-level retries live
  // inside implementations; parse failures always propagate un-retried.
  virtual ReasonerResponse complete(const ReasonerRequest& req) = 0;

  std::vector<SceneObject> extract_objects(const ReasonerRequest& req);
  ContextualParts propose_contextual_logic(const ReasonerRequest& req);
  std::vector<TemporalRecord> propose_temporal_predicates(const ReasonerRequest& req);

  // Parses the STEPS envelope and enforces that the sequence contains an
  // action matching the missing response (response_name/response_target
  // sections). A sequence without it is rejected, re-requested once, then an
  // error.
  std::vector<ActionProposal> propose_replan_sequence(const ReasonerRequest& req);
};

// Table-driven deterministic reasoner standing in for the guardrail VLM.
class MockReasoner : public Reasoner {
 public:
  explicit MockReasoner(const EnvironmentProfile& profile = EnvironmentProfile::household());
  std::string name() const override { return "mock"; }
  ReasonerResponse complete(const ReasonerRequest& req) override;

 private:
  std::string complete_contextual(const ReasonerRequest& req) const;
  std::string complete_temporal(const ReasonerRequest& req) const;
  std::string complete_replan(const ReasonerRequest& req) const;

  const EnvironmentProfile* profile_;
};

// Replays scenario-provided envelope texts per request kind, in order.
class ScriptedReasoner : public Reasoner {
 public:
  std::string name() const override { return "scripted"; }
  void push_response(RequestKind kind, std::string envelope_text);
  ReasonerResponse complete(const ReasonerRequest& req) override;
  size_t remaining(RequestKind kind) const;

 private:
  std::map<RequestKind, std::deque<std::string>> scripts_;
};

struct HttpReasonerConfig {
  std::string url;    // chat-completions endpoint, e.g. http://host/v1/chat/completions
  std::string model;
  std::string auth_token;
  int timeout_seconds = 30;
  std::string prompt_dir;  // directory with <kind>.txt templates
};

// Generic chat-completion client: model name, message list, temperature 0.
// One retry on transport failure, none on parse failure.
class HttpReasoner : public Reasoner {
 public:
  explicit HttpReasoner(HttpReasonerConfig config);
  std::string name() const override { return "http"; }
  ReasonerResponse complete(const ReasonerRequest& req) override;

 private:
  std::string build_prompt(const ReasonerRequest& req) const;
  std::string post_chat(const std::string& prompt) const;

  HttpReasonerConfig config_;
};

// JSON helpers for the machine-readable request sections.
std::string observation_to_json_text(const Observation& o);
Observation observation_from_json_text(const std::string& text);

struct DemonstrationRecord {
  std::string entry_id;
  std::string label;  // "benign" | "risky"
  std::string reasoning;
  std::vector<std::string> predicates;
};

std::string demonstrations_to_json_text(const std::vector<DemonstrationRecord>& demos);
std::vector<DemonstrationRecord> demonstrations_from_json_text(const std::string& text);

}  // namespace guardrail
