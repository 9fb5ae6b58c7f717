#include "qagen/textmetrics/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "qagen/corpus/tokenizer.hpp"
#include "qagen/error.hpp"

namespace qagen::textmetrics {

std::vector<std::string> union_vocabulary(std::span<const std::string> texts) {
  std::vector<std::string> vocab;
  for (const auto& text : texts) {
    auto tokens = corpus::tokenize(text);
    vocab.insert(vocab.end(), std::make_move_iterator(tokens.begin()), std::make_move_iterator(tokens.end()));
  }
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  return vocab;
}

WordDistribution word_distribution(std::string_view text, std::span<const std::string> vocab, double smoothing) {
  if (!(smoothing > 0.0) || !std::isfinite(smoothing)) throw ArgumentError("smoothing must be a positive finite number");
  if (vocab.empty()) throw ArgumentError("vocabulary must be non-empty");

  std::unordered_map<std::string_view, std::size_t> slot;
  slot.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (!slot.emplace(vocab[i], i).second) throw ArgumentError("duplicate vocabulary entry: " + vocab[i]);
  }

  std::vector<double> counts(vocab.size(), 0.0);
  double total = 0.0;
  for (const auto& token : corpus::tokenize(text)) {
    auto it = slot.find(token);
    if (it == slot.end()) continue;
    counts[it->second] += 1.0;
    total += 1.0;
  }

  WordDistribution out;
  out.vocab.assign(vocab.begin(), vocab.end());
  out.smoothing = smoothing;
  const double denom = total + smoothing * static_cast<double>(vocab.size());
  out.probs.reserve(vocab.size());
  for (double c : counts) out.probs.push_back((c + smoothing) / denom);
  return out;
}

double kl_divergence(const WordDistribution& p, const WordDistribution& q) {
  if (p.vocab != q.vocab || p.probs.size() != p.vocab.size() || q.probs.size() != q.vocab.size())
    throw ArgumentError("kl_divergence requires distributions over the same vocabulary");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    const double pi = p.probs[i];
    const double qi = q.probs[i];
    if (pi == 0.0) continue;
    if (!(qi > 0.0)) throw ArgumentError("kl_divergence: q has zero mass where p does not");
    sum += pi * std::log(pi / qi);
  }
  // Rounding can leave a tiny negative value for identical inputs.
  return std::max(sum, 0.0);
}

std::string_view direction_name(KlDirection d) {
  return d == KlDirection::SourceToQuestions ? "source||questions" : "questions||source";
}

OverlapResult overlap_score(std::string_view source_text, std::span<const std::string> questions, KlDirection direction,
                            double smoothing) {
  if (questions.empty()) throw ArgumentError("overlap_score requires at least one question");
  std::string joined;
  for (const auto& q : questions) {
    if (!joined.empty()) joined.push_back(' ');
    joined += q;
  }
  const std::string texts[] = {std::string(source_text), joined};
  auto vocab = union_vocabulary(texts);
  if (vocab.empty()) throw ArgumentError("overlap_score: source and questions contain no word tokens");

  const auto source = word_distribution(source_text, vocab, smoothing);
  const auto qs = word_distribution(joined, vocab, smoothing);

  OverlapResult out;
  out.direction = direction;
  out.smoothing = smoothing;
  out.vocab_size = vocab.size();
  out.value = direction == KlDirection::SourceToQuestions ? kl_divergence(source, qs) : kl_divergence(qs, source);
  return out;
}

}  // namespace qagen::textmetrics
