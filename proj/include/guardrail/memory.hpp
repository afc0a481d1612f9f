#pragma once
// Hybrid long-short safety memory. Short-term memory is the current episode's
// trajectory; long-term memory is a persistent store of safety experiences
// with dual context/action key vectors, label-balanced multi-grained
// retrieval (exact scan) and a validated update path that admits only entries
// whose predicates execute error-free against their own context.
// On-disk format: docs/memory-format.md (GUARDMEM v1).

#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "guardrail/core.hpp"
#include "guardrail/encoder.hpp"

namespace guardrail {

struct ShortTermMemory {
  Instruction instruction;
  std::vector<StepRecord> steps;
};

// Appends rec; rec.step_index must equal the current length.
void append_step(ShortTermMemory& m, StepRecord rec);

enum class ExperienceLabel { benign, risky };

std::string to_string(ExperienceLabel label);
ExperienceLabel label_from_string(std::string_view s);

struct ExperienceEntry {
  std::string entry_id;
  Observation observation;
  ActionProposal action;
  std::string reasoning;                // the readable safety demonstration
  std::string instruction_text;
  std::vector<std::string> predicates;  // canonical predicate sources
  std::string trajectory_snapshot;      // serialized short-term memory
  ExperienceLabel label = ExperienceLabel::benign;
  EmbeddingVector key_ctx;
  EmbeddingVector key_act;
  uint64_t created_at = 0;              // monotonic insert counter
};

struct RetrievalConfig {
  double lambda = 0.6;
  int k = 3;
};

struct LabelWeights {
  double benign = 1.0;
  double risky = 1.0;

  double of(ExperienceLabel label) const {
    return label == ExperienceLabel::benign ? benign : risky;
  }
};

// w(y) = N / (2 * n_y); a label with zero count gets the maximal boost N
// (flagged in logs). Balanced labels give w = 1 for both.
double label_weight(size_t total, size_t label_count);

// Relevance of one entry for queries (q_ctx, q_act):
//   S = w(y) * [lambda * cos(q_act, key_act) + (1 - lambda) * cos(q_ctx, key_ctx)]
double relevance_score(const ExperienceEntry& entry, const EmbeddingVector& q_ctx,
                       const EmbeddingVector& q_act, const RetrievalConfig& cfg,
                       const LabelWeights& weights);

struct UpdateResult {
  bool accepted = false;
  std::string reason;    // rejection reason ("" on accept)
  std::string entry_id;  // assigned id on accept
};

struct MemoryFileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Long-term memory: exact-scan retrieval, single writer, many readers.
class LongTermMemory {
 public:
  LongTermMemory() = default;
  LongTermMemory(LongTermMemory&&) = delete;
  LongTermMemory(const LongTermMemory&) = delete;

  // Top-k entries by descending relevance. Ties break toward larger
  // created_at (recency), then lexicographically smaller entry_id.
  std::vector<ExperienceEntry> retrieve(const EmbeddingVector& q_ctx,
                                        const EmbeddingVector& q_act,
                                        const RetrievalConfig& cfg) const;

  // Validates the candidate (all predicates parse and evaluate without error
  // against the candidate's own action/observation), computes its key vectors
  // from the canonical serializations, and inserts it with a fresh
  // created_at. Rejection is a normal outcome, reported in the result.
  UpdateResult update(ExperienceEntry candidate, const TextEncoder& encoder);

  LabelWeights label_weights() const;
  size_t size() const;
  std::vector<ExperienceEntry> snapshot() const;

  void save(const std::string& path) const;
  // Replaces the contents from a GUARDMEM v1 file; validates every entry and
  // refuses corrupt files without partially loading.
  void load(const std::string& path);
  // Replaces the contents from an in-memory snapshot (trusted, no re-validation).
  void assign(std::vector<ExperienceEntry> entries);

 private:
  mutable std::shared_mutex mutex_;
  std::vector<ExperienceEntry> entries_;
  uint64_t next_created_ = 1;
};

// Context-key text for an entry or query, mirroring the q_ctx composition:
// "<observation> | <instruction> | <trajectory>".
std::string context_key_text(const Observation& o, const std::string& instruction_text,
                             const std::string& trajectory_text);

// Validates predicates only (shared by update and load): every source parses
// and evaluates error-free against (action, observation).
UpdateResult validate_entry_predicates(const ExperienceEntry& entry);

}  // namespace guardrail
