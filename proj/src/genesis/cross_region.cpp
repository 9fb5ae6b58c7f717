#include "qagen/genesis/cross_region.hpp"

#include <algorithm>
#include <set>

#include "qagen/index/vector_index.hpp"

namespace qagen::genesis {

namespace {

void check_params(std::size_t min_regions, double threshold) {
  if (min_regions < 2) throw ArgumentError("min_regions must be >= 2");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ArgumentError("threshold must be in (0, 1]");
}

}  // namespace

std::vector<QuestionCluster> cluster_questions(std::span<const ClusterMember> members,
                                               std::span<const llm::EmbeddingVector> vectors,
                                               std::size_t min_regions, double threshold) {
  check_params(min_regions, threshold);
  if (members.size() != vectors.size()) throw ArgumentError("cluster_questions: members and vectors differ in size");
  const std::size_t n = members.size();

  std::vector<double> sim(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) sim[i * n + j] = sim[j * n + i] = index::cosine(vectors[i], vectors[j]);

  std::vector<bool> assigned(n, false);
  std::vector<QuestionCluster> out;
  for (std::size_t leader = 0; leader < n; ++leader) {
    if (assigned[leader]) continue;
    std::vector<std::size_t> group{leader};
    for (std::size_t j = leader + 1; j < n; ++j) {
      if (assigned[j]) continue;
      if (std::all_of(group.begin(), group.end(), [&](std::size_t g) { return sim[g * n + j] >= threshold; }))
        group.push_back(j);
    }
    for (std::size_t g : group) assigned[g] = true;

    std::set<std::string> regions;
    for (std::size_t g : group) regions.insert(members[g].region);
    if (regions.size() < min_regions) continue;

    QuestionCluster c;
    c.cluster_id = "x" + std::to_string(out.size());
    for (std::size_t g : group) c.members.push_back(members[g]);
    c.regions.assign(regions.begin(), regions.end());
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<QuestionCluster> find_cross_region_questions(const PairsByRegion& pairs_by_region,
                                                         std::size_t min_regions, double threshold,
                                                         llm::Embedder& embedder) {
  check_params(min_regions, threshold);
  std::vector<ClusterMember> members;
  std::vector<llm::EmbeddingVector> vectors;
  for (const auto& [region, pairs] : pairs_by_region) {
    for (const auto& p : pairs) {
      members.push_back({region, p.qa_id, p.question});
      vectors.push_back(index::embed(p.question, embedder));
    }
  }
  return cluster_questions(members, vectors, min_regions, threshold);
}

std::pair<std::vector<QAPair>, std::vector<QAPair>> holdout_split(std::span<const QAPair> pairs,
                                                                  std::span<const QuestionCluster> clusters,
                                                                  std::span<const std::string> cluster_ids) {
  std::set<std::string> held_ids;
  for (const auto& id : cluster_ids) {
    auto it = std::find_if(clusters.begin(), clusters.end(), [&](const auto& c) { return c.cluster_id == id; });
    if (it == clusters.end()) throw ArgumentError("unknown cluster id: " + id);
    for (const auto& m : it->members) held_ids.insert(m.qa_id);
  }
  std::pair<std::vector<QAPair>, std::vector<QAPair>> out;
  for (const auto& p : pairs) (held_ids.count(p.qa_id) ? out.second : out.first).push_back(p);
  return out;
}

}  // namespace qagen::genesis
