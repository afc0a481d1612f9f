#pragma once
// Evaluation harness: hosts the scripted black-box agent, runs scenarios
// through the guardrail against the simulator, applies the ground-truth
// oracles and computes ARR / ESR / SPR, with machine-readable reports and
// plain-text transcripts.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "guardrail/orchestrator.hpp"
#include "guardrail/simenv.hpp"

namespace guardrail::harness {

// The black-box agent stand-in: yields the scripted plan in order, skips
// blocked actions, plays corrective sequences before returning to the
// deferred action.
class ScriptedAgent {
 public:
  explicit ScriptedAgent(const std::vector<ActionProposal>& plan);

  struct Item {
    ActionProposal action;
    int plan_ordinal = -1;  // >= 0 when this is an original plan action
  };

  // Next proposal, or nullopt for done.
  std::optional<Item> next();
  // Feedback for the last proposal: a replan pushes the corrective sequence
  // in front and re-queues the deferred item; a block simply drops it.
  void on_replan(const std::vector<ActionProposal>& corrective, const Item& deferred);
  // Corrective actions from the episode-end sweep.
  void push_corrective(const std::vector<ActionProposal>& corrective);

 private:
  std::vector<Item> queue_;  // front = next
};

struct EpisodeTimings {
  std::vector<long long> verify_us;  // per committed step, when enabled
};

struct EpisodeResult {
  std::string scenario_id;
  InstructionCategory category = InstructionCategory::safe;
  std::string counterpart_id;
  std::string config_fingerprint;
  std::vector<StepAudit> steps;                 // guardrail log (empty in passthrough)
  std::vector<sim::TrajectoryStep> trajectory;  // committed actions + post states
  std::vector<sim::HazardEvent> hazard_events;
  bool temporal_conform = true;
  std::vector<ViolationReport> temporal_violations;
  bool completed = false;
  bool correctly_refused = false;  // >=1 block whose fired predicates touch an expected tag
  bool any_block = false;
  int finalize_rounds = 0;
  int max_replan_depth = 0;
  std::vector<std::string> warnings;
  std::string error;  // episode-level abort reason, "" = clean
  std::optional<EpisodeTimings> timings;
};

struct RunConfig {
  std::string scenario_dir;
  std::string reasoner_mode = "mock";  // mock | scripted | http
  RetrievalConfig retrieval;
  std::string memory_in;
  std::string memory_out;
  bool persist_memory = true;  // learn across episodes within the run
  bool fail_closed = false;
  bool baseline_passthrough = false;  // guardrail disabled
  bool audit_forward = false;         // evaluate L^f on replan steps for the log
  bool collect_timings = false;
  int jobs = 1;
  int finalize_round_limit = 8;
  HttpReasonerConfig http;
  HttpEncoderConfig embedding;
  bool use_http_encoder = false;

  std::string fingerprint() const;
};

struct CategoryMetrics {
  size_t count = 0;
  std::map<std::string, double> values;  // arr, esr, spr, completion, false_block_rate
};

struct SuiteReport {
  RunConfig config;
  std::vector<EpisodeResult> episodes;  // sorted by scenario id
  std::map<std::string, CategoryMetrics> metrics;
};

// The declared tag -> predicate-target map used by ARR's "correct reason"
// check: a block counts as correctly reasoned iff one of its fired
// predicates references one of the tag's target tokens.
const std::map<std::string, std::set<std::string>>& hazard_tag_targets();
bool block_matches_tags(const std::vector<StepAudit>& steps,
                        const std::vector<std::string>& expected_tags);

// Runs one scenario. The session writes into `memory`; pass a scratch copy
// when per-episode isolation is wanted.
EpisodeResult run_episode(const sim::Scenario& sc, Reasoner& reasoner, LongTermMemory& memory,
                          const TextEncoder& encoder, const RunConfig& cfg);

// ARR/ESR/SPR per category; throws on mixed config fingerprints.
std::map<std::string, CategoryMetrics> compute_metrics(const std::vector<EpisodeResult>& episodes);

SuiteReport run_suite(const RunConfig& cfg);

ordered_json episode_to_json(const EpisodeResult& e);
EpisodeResult episode_from_json(const ordered_json& j);
ordered_json report_to_json(const SuiteReport& report);
std::string episode_transcript(const EpisodeResult& e);
std::string report_text_summary(const ordered_json& report_json);
void write_report(const SuiteReport& report, const std::string& path);

// "category.metric OP value" with OP in {>=, <=, ==}; returns an error
// message or "" when the report satisfies the check.
std::string evaluate_check(const ordered_json& report_json, const std::string& check);

// Seed-memory pipeline: builds SeedExamples from training scenarios (each
// carries a "seed" marker) by simulating the plan prefix, then generates and
// persists exactly `count` entries.
std::vector<SeedExample> build_seed_examples(const std::vector<sim::Scenario>& scenarios);
void seed_run(const std::string& examples_dir, const std::string& reasoner_mode, size_t count,
              const std::string& out_path, const HttpReasonerConfig& http = {});

}  // namespace guardrail::harness
