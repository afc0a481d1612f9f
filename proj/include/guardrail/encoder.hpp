#pragma once
// Text-embedding boundary used by retrieval. The built-in encoder is a
// deterministic bag-of-tokens feature hasher so retrieval tests never depend
// on a network; an HTTP adapter can swap in an external embedding service
// behind the same interface (wire contract in docs/reasoner-protocol.md).

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace guardrail {

struct DimensionMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmbeddingVector {
  std::vector<double> values;
  double norm = 0.0;  // cached Euclidean norm

  static EmbeddingVector from_values(std::vector<double> values);
  size_t dimension() const { return values.size(); }
};

double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual EmbeddingVector encode(std::string_view text) const = 0;
  virtual int dimension() const = 0;
};

// Tokenizes on non-alphanumerics, hashes each token into D signed buckets
// (FNV-1a), L2-normalizes. Order-free: "a b" and "b a" embed identically.
class HashingEncoder : public TextEncoder {
 public:
  explicit HashingEncoder(int dim = 256);
  EmbeddingVector encode(std::string_view text) const override;
  int dimension() const override { return dim_; }

 private:
  int dim_;
};

struct HttpEncoderConfig {
  std::string url;         // e.g. http://host:port/embed
  std::string auth_token;  // optional bearer token
  int timeout_seconds = 30;
  int dimension = 256;
};

// POSTs {"text": ...} and expects {"embedding": [ ... ]} with exactly the
// configured dimension. Transport failures and dimension mismatches throw.
class HttpEncoder : public TextEncoder {
 public:
  explicit HttpEncoder(HttpEncoderConfig config);
  EmbeddingVector encode(std::string_view text) const override;
  int dimension() const override { return config_.dimension; }

 private:
  HttpEncoderConfig config_;
};

}  // namespace guardrail
