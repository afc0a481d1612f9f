#include "guardrail/encoder.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace guardrail {

EmbeddingVector EmbeddingVector::from_values(std::vector<double> values) {
  EmbeddingVector v;
  v.values = std::move(values);
  double sq = 0.0;
  for (double x : v.values) sq += x * x;
  v.norm = std::sqrt(sq);
  return v;
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.values.size() != v.values.size()) {
    throw DimensionMismatchError("cosine: dimensions differ (" +
                                 std::to_string(u.values.size()) + " vs " +
                                 std::to_string(v.values.size()) + ")");
  }
  if (u.norm == 0.0 || v.norm == 0.0) return 0.0;
  double dot = 0.0;
  for (size_t i = 0; i < u.values.size(); ++i) dot += u.values[i] * v.values[i];
  return dot / (u.norm * v.norm);
}

namespace {

// FNV-1a, fixed offset/prime so embeddings are identical across platforms.
uint64_t fnv1a(std::string_view token) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : token) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

HashingEncoder::HashingEncoder(int dim) : dim_(dim) {
  if (dim <= 0) throw std::invalid_argument("encoder dimension must be positive");
}

EmbeddingVector HashingEncoder::encode(std::string_view text) const {
  if (text.size() > 64 * 1024) throw std::invalid_argument("encode: text exceeds 64 KiB");
  std::vector<double> buckets(static_cast<size_t>(dim_), 0.0);
  std::string token;
  auto flush = [&]() {
    if (token.empty()) return;
    uint64_t h = fnv1a(token);
    size_t bucket = static_cast<size_t>(h % static_cast<uint64_t>(dim_));
    double sign = ((h >> 32) & 1ull) ? 1.0 : -1.0;
    buckets[bucket] += sign;
    token.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();

  double sq = 0.0;
  for (double x : buckets) sq += x * x;
  if (sq > 0.0) {
    double inv = 1.0 / std::sqrt(sq);
    for (double& x : buckets) x *= inv;
  }
  return EmbeddingVector::from_values(std::move(buckets));
}

HttpEncoder::HttpEncoder(HttpEncoderConfig config) : config_(std::move(config)) {
  if (config_.url.empty()) throw std::invalid_argument("HttpEncoder: url is required");
}

namespace {

// Splits "http://host:8080/path" into client base and path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = url.find('/', host_start);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

EmbeddingVector HttpEncoder::encode(std::string_view text) const {
  auto [base, path] = split_url(config_.url);
  httplib::Client client(base);
  client.set_connection_timeout(config_.timeout_seconds);
  client.set_read_timeout(config_.timeout_seconds);
  httplib::Headers headers;
  if (!config_.auth_token.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.auth_token);
  }
  nlohmann::json body;
  body["text"] = std::string(text);
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    throw std::runtime_error("embedding request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw std::runtime_error("embedding request failed: HTTP " + std::to_string(res->status));
  }
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("embedding response is not JSON: ") + e.what());
  }
  if (!parsed.contains("embedding") || !parsed["embedding"].is_array()) {
    throw std::runtime_error("embedding response missing 'embedding' array");
  }
  std::vector<double> values;
  values.reserve(parsed["embedding"].size());
  for (const auto& x : parsed["embedding"]) values.push_back(x.get<double>());
  if (static_cast<int>(values.size()) != config_.dimension) {
    throw DimensionMismatchError("embedding dimension " + std::to_string(values.size()) +
                                 " != configured " + std::to_string(config_.dimension));
  }
  return EmbeddingVector::from_values(std::move(values));
}

}  // namespace guardrail
