#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qagen::llm {

struct EmbeddingVector {
  std::vector<double> values;
  double norm = 0.0;

  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> v);

  std::size_t dims() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(std::string_view text) = 0;
  virtual std::string name() const = 0;
};

// Deterministic bag-of-words embedder: every lowercased token seeds a
// Gaussian pseudo-random vector, the vectors are summed and the result is
// scaled to unit norm. Texts sharing words land close together, which makes
// it usable for offline retrieval runs.
class HashEmbedder : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dims = 64, std::uint64_t seed = 0);
  EmbeddingVector embed(std::string_view text) override;
  std::string name() const override;

  std::size_t dims() const { return dims_; }

 private:
  std::size_t dims_;
  std::uint64_t seed_;
};

// Precomputed vectors from a JSONL file of {"text": ..., "values": [...]}.
// Unknown texts throw CacheMissError.
class FileEmbedder : public Embedder {
 public:
  explicit FileEmbedder(const std::filesystem::path& path);
  EmbeddingVector embed(std::string_view text) override;
  std::string name() const override { return "file(" + path_ + ")"; }

  void add(std::string text, std::vector<double> values);
  static void write(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::vector<double>>>& rows);

 private:
  std::string path_;
  std::unordered_map<std::string, EmbeddingVector> table_;
};

// Validating front door for every embedder: empty text is an ArgumentError.
EmbeddingVector embed_text(std::string_view text, Embedder& backend);

}  // namespace qagen::llm
