#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qagen/corpus/chunker.hpp"
#include "qagen/error.hpp"
#include "qagen/llm/embedding.hpp"

namespace qagen::index {

using llm::Embedder;
using llm::EmbeddingVector;

class DimensionError : public Error {
 public:
  DimensionError(const std::string& chunk_id, std::size_t expected, std::size_t got)
      : Error("embedding for '" + chunk_id + "' has " + std::to_string(got) + " dims, index expects " +
              std::to_string(expected)),
        chunk_id_(chunk_id) {}
  const std::string& chunk_id() const { return chunk_id_; }

 private:
  std::string chunk_id_;
};

// Embeds non-empty text and checks the result has a positive norm.
EmbeddingVector embed(std::string_view text, Embedder& backend);

// Cosine similarity; throws ArgumentError on a dims mismatch or a zero norm.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct RetrievalHit {
  std::string chunk_id;
  double score = 0.0;

  bool operator==(const RetrievalHit&) const = default;
};

using IndexEntry = std::pair<std::string, EmbeddingVector>;

// Exact cosine index keyed by chunk id. Immutable once built in practice:
// search() is const and safe to call concurrently.
class VectorIndex {
 public:
  VectorIndex() = default;
  explicit VectorIndex(std::size_t dims) : dims_(dims) {}

  // Throws DimensionError on a dims mismatch and ArgumentError on a duplicate
  // id or a zero vector. The first entry fixes dims when none was given.
  void add(std::string chunk_id, EmbeddingVector vector);

  // min(k, size) hits by descending cosine, ties by ascending chunk id.
  // An empty index yields no hits; k == 0 is an ArgumentError.
  std::vector<RetrievalHit> search(const EmbeddingVector& query, std::size_t k) const;

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  std::size_t dims() const { return dims_; }
  bool contains(const std::string& chunk_id) const { return pos_.count(chunk_id) != 0; }
  const EmbeddingVector& at(const std::string& chunk_id) const;
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<EmbeddingVector>& vectors() const { return vectors_; }

  // One JSON header line {format, dims, metric, count} followed by one
  // {chunk_id, values} line per entry, in insertion order.
  void write(std::ostream& out) const;
  static VectorIndex read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static VectorIndex load(const std::filesystem::path& path);

 private:
  std::size_t dims_ = 0;
  std::vector<std::string> ids_;
  std::vector<EmbeddingVector> vectors_;
  std::unordered_map<std::string, std::size_t> pos_;
};

// One entry per chunk, embedded with up to `max_parallel` concurrent calls.
// Throws ArgumentError on an empty chunk list and DimensionError naming the
// first chunk whose vector disagrees with the others.
VectorIndex build_index(std::span<const corpus::Chunk> chunks, Embedder& backend, std::size_t max_parallel = 1);

VectorIndex build_index(std::span<const IndexEntry> entries);

}  // namespace qagen::index
