#include "qagen/index/vector_index.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "qagen/parallel.hpp"

namespace qagen::index {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "qagen-index";

bool ranks_before(const RetrievalHit& a, const RetrievalHit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.chunk_id < b.chunk_id;
}

}  // namespace

EmbeddingVector embed(std::string_view text, Embedder& backend) {
  EmbeddingVector v = llm::embed_text(text, backend);
  if (v.dims() == 0 || !(v.norm > 0.0)) {
    throw ArgumentError("embedder " + backend.name() + " returned a zero vector");
  }
  return v;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dims() != b.dims()) {
    throw ArgumentError("cosine of vectors with different dims (" + std::to_string(a.dims()) + " vs " +
                        std::to_string(b.dims()) + ")");
  }
  if (!(a.norm > 0.0) || !(b.norm > 0.0)) throw ArgumentError("cosine of a zero vector");
  const double dot = std::inner_product(a.values.begin(), a.values.end(), b.values.begin(), 0.0);
  return dot / (a.norm * b.norm);
}

void VectorIndex::add(std::string chunk_id, EmbeddingVector vector) {
  if (dims_ == 0) dims_ = vector.dims();
  if (vector.dims() != dims_) throw DimensionError(chunk_id, dims_, vector.dims());
  if (!(vector.norm > 0.0)) throw ArgumentError("zero vector for chunk '" + chunk_id + "'");
  if (pos_.count(chunk_id)) throw ArgumentError("duplicate chunk id in index: " + chunk_id);
  pos_.emplace(chunk_id, ids_.size());
  ids_.push_back(std::move(chunk_id));
  vectors_.push_back(std::move(vector));
}

const EmbeddingVector& VectorIndex::at(const std::string& chunk_id) const {
  auto it = pos_.find(chunk_id);
  if (it == pos_.end()) throw ArgumentError("unknown chunk id: " + chunk_id);
  return vectors_[it->second];
}

std::vector<RetrievalHit> VectorIndex::search(const EmbeddingVector& query, std::size_t k) const {
  if (k == 0) throw ArgumentError("search k must be >= 1");
  if (empty()) return {};
  if (query.dims() != dims_) throw DimensionError("<query>", dims_, query.dims());
  if (!(query.norm > 0.0)) throw ArgumentError("search with a zero query vector");

  std::vector<RetrievalHit> scored;
  scored.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const auto& v = vectors_[i];
    const double dot = std::inner_product(v.values.begin(), v.values.end(), query.values.begin(), 0.0);
    scored.push_back({ids_[i], dot / (v.norm * query.norm)});
  }
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), ranks_before);
  scored.resize(n);
  return scored;
}

void VectorIndex::write(std::ostream& out) const {
  out << json{{"format", kFormat}, {"dims", dims_}, {"metric", "cosine"}, {"count", ids_.size()}}.dump() << '\n';
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    out << json{{"chunk_id", ids_[i]}, {"values", vectors_[i].values}}.dump() << '\n';
  }
}

VectorIndex VectorIndex::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("index file is empty");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("bad index header: ") + e.what(), e.byte);
  }
  if (header.value("format", "") != kFormat || header.value("metric", "") != "cosine") {
    throw SchemaError("format", "not a cosine qagen index file");
  }
  VectorIndex index(header.at("dims").get<std::size_t>());
  const auto count = header.at("count").get<std::size_t>();
  std::size_t offset = line.size() + 1;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      try {
        auto j = json::parse(line);
        index.add(j.at("chunk_id").get<std::string>(), EmbeddingVector(j.at("values").get<std::vector<double>>()));
      } catch (const json::exception& e) {
        throw ParseError(std::string("bad index entry: ") + e.what(), offset);
      }
    }
    offset += line.size() + 1;
  }
  if (index.size() != count) {
    throw SchemaError("count", "index header says " + std::to_string(count) + " entries, file has " +
                                   std::to_string(index.size()));
  }
  return index;
}

void VectorIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write index file: " + path.string());
  write(out);
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open index file: " + path.string());
  return read(in);
}

VectorIndex build_index(std::span<const corpus::Chunk> chunks, Embedder& backend, std::size_t max_parallel) {
  if (chunks.empty()) throw ArgumentError("cannot build an index from zero chunks");
  std::vector<EmbeddingVector> vectors(chunks.size());
  parallel_for(chunks.size(), max_parallel, [&](std::size_t i) { vectors[i] = embed(chunks[i].text, backend); });
  VectorIndex index;
  for (std::size_t i = 0; i < chunks.size(); ++i) index.add(chunks[i].chunk_id, std::move(vectors[i]));
  return index;
}

VectorIndex build_index(std::span<const IndexEntry> entries) {
  VectorIndex index;
  for (const auto& [id, v] : entries) index.add(id, v);
  return index;
}

}  // namespace qagen::index
