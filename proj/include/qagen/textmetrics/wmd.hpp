#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qagen/error.hpp"
#include "qagen/textmetrics/transport.hpp"

namespace qagen::textmetrics {

class OovError : public Error {
 public:
  OovError(const std::string& what, std::vector<std::string> tokens) : Error(what), tokens_(std::move(tokens)) {}
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
};

class WordEmbeddingTable {
 public:
  WordEmbeddingTable() = default;
  explicit WordEmbeddingTable(std::size_t dims) : dims_(dims) {}

  // First vector fixes dims; later mismatches throw ArgumentError.
  void add(std::string token, std::vector<double> vector);
  const std::vector<double>* find(std::string_view token) const;
  const std::vector<double>& at(std::string_view token) const;  // throws OovError

  std::size_t dims() const { return dims_; }
  std::size_t size() const { return table_.size(); }

  WordEmbeddingTable scaled(double factor) const;

  // Text word-vector format: "token v1 v2 ... vd" per line. A leading
  // "<count> <dims>" header line (word2vec style) is skipped.
  static WordEmbeddingTable load_text(const std::filesystem::path& path);
  // Seeded Gaussian vectors for each token.
  static WordEmbeddingTable synthetic(std::span<const std::string> vocab, std::size_t dims, std::uint64_t seed);

 private:
  std::size_t dims_ = 0;
  std::unordered_map<std::string, std::vector<double>> table_;
};

// Normalized bag of words restricted to in-table tokens, in first-seen order.
struct NbowDocument {
  std::vector<std::string> tokens;
  std::vector<double> weights;
  std::vector<std::string> dropped_oov;
};

// OOV tokens are dropped (logged); a text with no in-table token throws
// OovError listing what was dropped.
NbowDocument make_nbow(std::string_view text, const WordEmbeddingTable& table);

struct WmdResult {
  double distance = 0.0;
  TransportPlan plan;  // indices into source / target nBOW tokens
  NbowDocument source;
  NbowDocument target;
};

// Word Mover's Distance: exact transport between the nBOW masses with
// Euclidean distance between word vectors as ground cost.
WmdResult wmd(std::string_view doc_a, std::string_view doc_b, const WordEmbeddingTable& table);
WmdResult wmd(const NbowDocument& a, const NbowDocument& b, const WordEmbeddingTable& table);

// max of the two one-sided relaxations (each word ships all its mass to the
// nearest word on the other side). Always <= WMD; used only as a pre-filter.
double relaxed_wmd_lower_bound(const NbowDocument& a, const NbowDocument& b, const WordEmbeddingTable& table);

double euclidean(std::span<const double> a, std::span<const double> b);

}  // namespace qagen::textmetrics
