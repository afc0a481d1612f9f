#include "guardrail/memory.hpp"

#include <algorithm>
#include <fstream>

#include "guardrail/dsl.hpp"
#include "guardrail/json_io.hpp"
#include "guardrail/log.hpp"

namespace guardrail {

void append_step(ShortTermMemory& m, StepRecord rec) {
  if (rec.step_index != static_cast<int>(m.steps.size())) {
    throw std::invalid_argument("append_step: index gap (got " +
                                std::to_string(rec.step_index) + ", expected " +
                                std::to_string(m.steps.size()) + ")");
  }
  m.steps.push_back(std::move(rec));
}

std::string to_string(ExperienceLabel label) {
  return label == ExperienceLabel::benign ? "benign" : "risky";
}

ExperienceLabel label_from_string(std::string_view s) {
  if (s == "benign") return ExperienceLabel::benign;
  if (s == "risky") return ExperienceLabel::risky;
  throw std::invalid_argument("unknown experience label: " + std::string(s));
}

double label_weight(size_t total, size_t label_count) {
  if (label_count == 0) {
    log::warn("label_weight: zero-count label boosted to N=" + std::to_string(total));
    return static_cast<double>(total);
  }
  return static_cast<double>(total) / (2.0 * static_cast<double>(label_count));
}

double relevance_score(const ExperienceEntry& entry, const EmbeddingVector& q_ctx,
                       const EmbeddingVector& q_act, const RetrievalConfig& cfg,
                       const LabelWeights& weights) {
  double sim_act = cosine(q_act, entry.key_act);
  double sim_ctx = cosine(q_ctx, entry.key_ctx);
  return weights.of(entry.label) * (cfg.lambda * sim_act + (1.0 - cfg.lambda) * sim_ctx);
}

std::string context_key_text(const Observation& o, const std::string& instruction_text,
                             const std::string& trajectory_text) {
  return serialize_observation(o) + " | " + instruction_text + " | " + trajectory_text;
}

UpdateResult validate_entry_predicates(const ExperienceEntry& entry) {
  for (const std::string& source : entry.predicates) {
    dsl::ExprPtr expr;
    try {
      expr = dsl::parse_predicate(source);
    } catch (const dsl::ParseError& e) {
      return {false, std::string("syntax-error: ") + e.what() + " in '" + source + "'"};
    }
    try {
      dsl::evaluate_predicate(*expr, entry.action, entry.observation);
    } catch (const dsl::EvalError& e) {
      return {false, std::string(e.what()) + " in '" + source + "'"};
    }
  }
  return {true, ""};
}

std::vector<ExperienceEntry> LongTermMemory::retrieve(const EmbeddingVector& q_ctx,
                                                      const EmbeddingVector& q_act,
                                                      const RetrievalConfig& cfg) const {
  std::shared_lock lock(mutex_);
  if (entries_.empty() || cfg.k <= 0) return {};

  size_t benign = 0;
  for (const auto& e : entries_) {
    if (e.label == ExperienceLabel::benign) ++benign;
  }
  LabelWeights weights;
  weights.benign = label_weight(entries_.size(), benign);
  weights.risky = label_weight(entries_.size(), entries_.size() - benign);

  struct Scored {
    double score;
    const ExperienceEntry* entry;
  };
  std::vector<Scored> scored;
  scored.reserve(entries_.size());
  for (const auto& e : entries_) {
    scored.push_back({relevance_score(e, q_ctx, q_act, cfg, weights), &e});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.entry->created_at != b.entry->created_at) return a.entry->created_at > b.entry->created_at;
    return a.entry->entry_id < b.entry->entry_id;
  });

  size_t n = std::min(static_cast<size_t>(cfg.k), scored.size());
  std::vector<ExperienceEntry> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out.push_back(*scored[i].entry);
  return out;
}

UpdateResult LongTermMemory::update(ExperienceEntry candidate, const TextEncoder& encoder) {
  UpdateResult check = validate_entry_predicates(candidate);
  if (!check.accepted) return check;

  candidate.key_ctx = encoder.encode(context_key_text(
      candidate.observation, candidate.instruction_text, candidate.trajectory_snapshot));
  candidate.key_act = encoder.encode(action_text(candidate.action));

  std::unique_lock lock(mutex_);
  candidate.created_at = next_created_++;
  if (candidate.entry_id.empty()) {
    candidate.entry_id = "mem_" + std::to_string(candidate.created_at);
  }
  std::string id = candidate.entry_id;
  entries_.push_back(std::move(candidate));
  return {true, "", id};
}

LabelWeights LongTermMemory::label_weights() const {
  std::shared_lock lock(mutex_);
  size_t benign = 0;
  for (const auto& e : entries_) {
    if (e.label == ExperienceLabel::benign) ++benign;
  }
  LabelWeights w;
  if (!entries_.empty()) {
    w.benign = label_weight(entries_.size(), benign);
    w.risky = label_weight(entries_.size(), entries_.size() - benign);
  }
  return w;
}

size_t LongTermMemory::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::vector<ExperienceEntry> LongTermMemory::snapshot() const {
  std::shared_lock lock(mutex_);
  return entries_;
}

void LongTermMemory::save(const std::string& path) const {
  std::shared_lock lock(mutex_);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MemoryFileError("cannot open for write: " + path);

  size_t dim = entries_.empty() ? 0 : entries_.front().key_ctx.dimension();
  out << "GUARDMEM v1 dim=" << dim << "\n";
  for (const auto& e : entries_) {
    ordered_json j;
    j["entry_id"] = e.entry_id;
    j["label"] = to_string(e.label);
    j["created_at"] = e.created_at;
    j["instruction_text"] = e.instruction_text;
    j["reasoning"] = e.reasoning;
    j["predicates"] = e.predicates;
    j["trajectory_snapshot"] = e.trajectory_snapshot;
    j["action"] = to_json(e.action);
    j["observation"] = to_json(e.observation);
    j["key_ctx"] = e.key_ctx.values;
    j["key_act"] = e.key_act.values;
    out << j.dump() << "\n";
  }
  if (!out.good()) throw MemoryFileError("write failed: " + path);
}

void LongTermMemory::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MemoryFileError("cannot open memory file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw MemoryFileError("empty memory file: " + path);
  size_t dim = 0;
  if (header.rfind("GUARDMEM v1 dim=", 0) != 0) {
    throw MemoryFileError("version mismatch: expected 'GUARDMEM v1' header, got '" + header + "'");
  }
  try {
    dim = std::stoul(header.substr(16));
  } catch (const std::exception&) {
    throw MemoryFileError("malformed dimension in header: '" + header + "'");
  }

  std::vector<ExperienceEntry> loaded;
  uint64_t max_created = 0;
  std::string line;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw MemoryFileError("corrupt record at line " + std::to_string(line_no) + ": " + e.what());
    }
    ExperienceEntry e;
    try {
      e.entry_id = j.at("entry_id").get<std::string>();
      e.label = label_from_string(j.at("label").get<std::string>());
      e.created_at = j.at("created_at").get<uint64_t>();
      e.instruction_text = j.at("instruction_text").get<std::string>();
      e.reasoning = j.at("reasoning").get<std::string>();
      e.predicates = j.at("predicates").get<std::vector<std::string>>();
      e.trajectory_snapshot = j.at("trajectory_snapshot").get<std::string>();
      e.action = action_from_json(j.at("action"));
      e.observation = observation_from_json(j.at("observation"));
      e.key_ctx = EmbeddingVector::from_values(j.at("key_ctx").get<std::vector<double>>());
      e.key_act = EmbeddingVector::from_values(j.at("key_act").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& ex) {
      throw MemoryFileError("missing/invalid field at line " + std::to_string(line_no) + ": " +
                            ex.what());
    }
    if (dim != 0 && (e.key_ctx.dimension() != dim || e.key_act.dimension() != dim)) {
      throw MemoryFileError("entry " + e.entry_id + ": key dimension differs from header");
    }
    UpdateResult check = validate_entry_predicates(e);
    if (!check.accepted) {
      throw MemoryFileError("entry " + e.entry_id + ": invariant violation: " + check.reason);
    }
    max_created = std::max(max_created, e.created_at);
    loaded.push_back(std::move(e));
  }
  if (in.bad()) throw MemoryFileError("read failed: " + path);

  std::unique_lock lock(mutex_);
  entries_ = std::move(loaded);
  next_created_ = max_created + 1;
}

}  // namespace guardrail
