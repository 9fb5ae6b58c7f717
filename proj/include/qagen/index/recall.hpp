#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qagen/index/vector_index.hpp"

namespace qagen::index {

struct Probe {
  std::string question_id;
  EmbeddingVector query;
  std::string truth_chunk_id;
};

struct ProbeOutcome {
  std::string question_id;
  std::string truth_chunk_id;
  bool hit = false;
  std::size_t rank = 0;  // 1-based position of the truth chunk, 0 when missed
};

struct RecallReport {
  std::size_t k = 0;
  std::size_t total_questions = 0;
  std::size_t hits = 0;
  double recall = 0.0;  // hits / total_questions, 0 for an empty probe set
  std::vector<ProbeOutcome> outcomes;
};

// A probe is a hit when its truth chunk id is among the top-k results.
// Throws ArgumentError for a truth id missing from the index.
RecallReport recall_at_k(const VectorIndex& index, std::span<const Probe> probes, std::size_t k);

// recall_at_k for each k, sharing one search per probe at max(ks).
std::vector<RecallReport> recall_sweep(const VectorIndex& index, std::span<const Probe> probes,
                                       std::span<const std::size_t> ks);

struct GrowthPoint {
  std::size_t index_size = 0;
  RecallReport report;
};

// Recall@k of `probes` against base, then base plus each cumulative prefix
// of the distractor batches. Distractor ids must not collide with base ids
// or with each other.
std::vector<GrowthPoint> index_growth_ablation(std::span<const IndexEntry> base,
                                               const std::vector<std::vector<IndexEntry>>& distractor_batches,
                                               std::span<const Probe> probes, std::size_t k = 3);

// CSV columns k,total,hits,recall.
void write_recall_csv(std::ostream& out, std::span<const RecallReport> reports);
// "| Top-k | Recall |" table with percentages.
std::string recall_markdown(std::span<const RecallReport> reports);

// CSV columns index_size,k,total,hits,recall.
void write_growth_csv(std::ostream& out, std::span<const GrowthPoint> points);
std::string growth_markdown(std::span<const GrowthPoint> points);

}  // namespace qagen::index
