#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qagen/textmetrics/wmd.hpp"

namespace qagen::textmetrics {

// Pairwise WMD between questions. Symmetric with a zero diagonal.
struct SimilarityMatrix {
  std::size_t n = 0;
  std::vector<double> values;  // row-major n x n
  std::vector<std::string> labels;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

struct DiversityResult {
  double score = 0.0;  // mean of the n(n-1) off-diagonal entries
  SimilarityMatrix matrix;
};

// Throws ArgumentError for fewer than two questions. Each unordered pair is
// solved once on one of `max_parallel` workers and mirrored.
DiversityResult diversity_score(std::span<const std::string> questions, const WordEmbeddingTable& table,
                                std::span<const std::string> labels = {}, std::size_t max_parallel = 1);

}  // namespace qagen::textmetrics
