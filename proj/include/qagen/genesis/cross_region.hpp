#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qagen/genesis/generation.hpp"
#include "qagen/llm/embedding.hpp"

namespace qagen::genesis {

inline constexpr double kDefaultClusterThreshold = 0.90;
inline constexpr std::size_t kDefaultMinRegions = 3;

struct ClusterMember {
  std::string region;
  std::string qa_id;
  std::string question;

  bool operator==(const ClusterMember&) const = default;
};

struct QuestionCluster {
  std::string cluster_id;
  std::vector<ClusterMember> members;
  std::vector<std::string> regions;  // distinct, sorted

  bool operator==(const QuestionCluster&) const = default;
};

using PairsByRegion = std::map<std::string, std::vector<QAPair>>;

// Leader clustering over questions in (region, position) order: each
// unassigned question opens a group and admits every later unassigned
// question whose cosine to all current members is >= threshold. Every
// grouped question is consumed; groups spanning >= min_regions regions are
// returned with ids "x0", "x1", ... Throws ArgumentError for min_regions < 2
// or threshold outside (0, 1].
std::vector<QuestionCluster> find_cross_region_questions(const PairsByRegion& pairs_by_region,
                                                         std::size_t min_regions, double threshold,
                                                         llm::Embedder& embedder);

// Same clustering over precomputed unit-or-not embeddings, one per item in
// `members` order (used by the pipeline and tests).
std::vector<QuestionCluster> cluster_questions(std::span<const ClusterMember> members,
                                               std::span<const llm::EmbeddingVector> vectors,
                                               std::size_t min_regions, double threshold);

// heldout = pairs whose qa_id belongs to a listed cluster. Throws
// ArgumentError for an id not among `clusters`.
std::pair<std::vector<QAPair>, std::vector<QAPair>> holdout_split(std::span<const QAPair> pairs,
                                                                  std::span<const QuestionCluster> clusters,
                                                                  std::span<const std::string> cluster_ids);

}  // namespace qagen::genesis
