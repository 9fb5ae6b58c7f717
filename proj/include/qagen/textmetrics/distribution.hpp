#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qagen::textmetrics {

// Smoothed unigram distribution over an explicit vocabulary.
struct WordDistribution {
  std::vector<std::string> vocab;
  std::vector<double> probs;
  double smoothing = 1.0;
};

// Sorted, de-duplicated lowercase tokens of all texts.
std::vector<std::string> union_vocabulary(std::span<const std::string> texts);

// prob(t) = (count(t) + smoothing) / (N + smoothing * |vocab|), where N counts
// the text's tokens that fall inside the vocabulary. Throws ArgumentError for
// smoothing <= 0 or an empty / duplicated vocabulary.
WordDistribution word_distribution(std::string_view text, std::span<const std::string> vocab,
                                   double smoothing = 1.0);

// sum p * ln(p / q), in nats. Throws ArgumentError unless both share the
// same vocabulary in the same order.
double kl_divergence(const WordDistribution& p, const WordDistribution& q);

enum class KlDirection { SourceToQuestions, QuestionsToSource };

std::string_view direction_name(KlDirection d);

struct OverlapResult {
  double value = 0.0;
  KlDirection direction = KlDirection::SourceToQuestions;
  double smoothing = 1.0;
  std::size_t vocab_size = 0;
};

// KL between the source text and the space-joined questions over their
// union vocabulary. Default direction D(source || questions).
OverlapResult overlap_score(std::string_view source_text, std::span<const std::string> questions,
                            KlDirection direction = KlDirection::SourceToQuestions, double smoothing = 1.0);

}  // namespace qagen::textmetrics
