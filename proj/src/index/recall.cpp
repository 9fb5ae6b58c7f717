#include "qagen/index/recall.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <set>
#include <sstream>

namespace qagen::index {

namespace {

std::string percent(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * x);
  return buf;
}

RecallReport score_ranks(std::span<const Probe> probes, const std::vector<std::size_t>& ranks, std::size_t k) {
  RecallReport r;
  r.k = k;
  r.total_questions = probes.size();
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const bool hit = ranks[i] != 0 && ranks[i] <= k;
    r.outcomes.push_back({probes[i].question_id, probes[i].truth_chunk_id, hit, hit ? ranks[i] : 0});
    if (hit) ++r.hits;
  }
  r.recall = r.total_questions ? static_cast<double>(r.hits) / static_cast<double>(r.total_questions) : 0.0;
  return r;
}

// Rank of each probe's truth chunk within the top `depth` hits, 0 if absent.
std::vector<std::size_t> truth_ranks(const VectorIndex& index, std::span<const Probe> probes, std::size_t depth) {
  std::vector<std::size_t> ranks;
  ranks.reserve(probes.size());
  for (const auto& p : probes) {
    if (!index.contains(p.truth_chunk_id)) {
      throw ArgumentError("probe '" + p.question_id + "' has unknown truth chunk id: " + p.truth_chunk_id);
    }
    const auto hits = index.search(p.query, depth);
    std::size_t rank = 0;
    for (std::size_t i = 0; i < hits.size(); ++i) {
      if (hits[i].chunk_id == p.truth_chunk_id) {
        rank = i + 1;
        break;
      }
    }
    ranks.push_back(rank);
  }
  return ranks;
}

}  // namespace

RecallReport recall_at_k(const VectorIndex& index, std::span<const Probe> probes, std::size_t k) {
  if (k == 0) throw ArgumentError("recall k must be >= 1");
  return score_ranks(probes, truth_ranks(index, probes, k), k);
}

std::vector<RecallReport> recall_sweep(const VectorIndex& index, std::span<const Probe> probes,
                                       std::span<const std::size_t> ks) {
  if (ks.empty()) return {};
  const std::size_t depth = *std::max_element(ks.begin(), ks.end());
  if (*std::min_element(ks.begin(), ks.end()) == 0) throw ArgumentError("recall k must be >= 1");
  const auto ranks = truth_ranks(index, probes, depth);
  std::vector<RecallReport> out;
  for (std::size_t k : ks) out.push_back(score_ranks(probes, ranks, k));
  return out;
}

std::vector<GrowthPoint> index_growth_ablation(std::span<const IndexEntry> base,
                                               const std::vector<std::vector<IndexEntry>>& distractor_batches,
                                               std::span<const Probe> probes, std::size_t k) {
  std::set<std::string> seen;
  for (const auto& [id, v] : base) seen.insert(id);
  for (const auto& batch : distractor_batches) {
    for (const auto& [id, v] : batch) {
      if (!seen.insert(id).second) throw ArgumentError("distractor id collides with an existing entry: " + id);
    }
  }

  VectorIndex index = build_index(base);
  std::vector<GrowthPoint> points;
  points.push_back({index.size(), recall_at_k(index, probes, k)});
  for (const auto& batch : distractor_batches) {
    for (const auto& [id, v] : batch) index.add(id, v);
    points.push_back({index.size(), recall_at_k(index, probes, k)});
  }
  return points;
}

void write_recall_csv(std::ostream& out, std::span<const RecallReport> reports) {
  out << "k,total,hits,recall\n";
  for (const auto& r : reports) out << r.k << ',' << r.total_questions << ',' << r.hits << ',' << r.recall << '\n';
}

std::string recall_markdown(std::span<const RecallReport> reports) {
  std::ostringstream out;
  out << "| Top-k | Recall |\n|---|---|\n";
  for (const auto& r : reports) out << "| " << r.k << " | " << percent(r.recall) << " |\n";
  return out.str();
}

void write_growth_csv(std::ostream& out, std::span<const GrowthPoint> points) {
  out << "index_size,k,total,hits,recall\n";
  for (const auto& p : points) {
    out << p.index_size << ',' << p.report.k << ',' << p.report.total_questions << ',' << p.report.hits << ','
        << p.report.recall << '\n';
  }
}

std::string growth_markdown(std::span<const GrowthPoint> points) {
  std::ostringstream out;
  const std::size_t k = points.empty() ? 3 : points.front().report.k;
  out << "| Index size | Recall@top-" << k << " |\n|---|---|\n";
  for (const auto& p : points) out << "| " << p.index_size << " | " << percent(p.report.recall) << " |\n";
  return out.str();
}

}  // namespace qagen::index
