#include "qagen/textmetrics/diversity.hpp"

#include "qagen/error.hpp"
#include "qagen/parallel.hpp"

namespace qagen::textmetrics {

DiversityResult diversity_score(std::span<const std::string> questions, const WordEmbeddingTable& table,
                                std::span<const std::string> labels, std::size_t max_parallel) {
  const std::size_t n = questions.size();
  if (n < 2) throw ArgumentError("diversity_score requires at least two questions");
  if (!labels.empty() && labels.size() != n) throw ArgumentError("diversity_score: labels size != questions size");

  std::vector<NbowDocument> docs;
  docs.reserve(n);
  for (const auto& q : questions) docs.push_back(make_nbow(q, table));

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  DiversityResult out;
  auto& m = out.matrix;
  m.n = n;
  m.values.assign(n * n, 0.0);
  if (labels.empty()) {
    for (std::size_t i = 0; i < n; ++i) m.labels.push_back("q" + std::to_string(i));
  } else {
    m.labels.assign(labels.begin(), labels.end());
  }

  parallel_for(pairs.size(), max_parallel, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    const double d = wmd(docs[i], docs[j], table).distance;
    m.values[i * n + j] = d;
    m.values[j * n + i] = d;
  });

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) sum += m(i, j);
  out.score = sum / static_cast<double>(n * (n - 1));
  return out;
}

}  // namespace qagen::textmetrics
