#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qagen::corpus {

// Byte range [begin, end) of one word token inside the tokenized text.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const TokenSpan&) const = default;
};

// Word tokenizer shared by chunking, counting and the text metrics.
//
// A token is a maximal run of ASCII letters/digits or non-ASCII bytes (so
// UTF-8 words stay whole). An apostrophe joins two word runs ("farmer's").
// Everything else (whitespace, punctuation) separates tokens and is dropped.
std::vector<TokenSpan> token_spans(std::string_view text);

std::size_t count_tokens(std::string_view text);

// Lowercased token strings.
std::vector<std::string> tokenize(std::string_view text);

std::string to_lower(std::string_view text);

}  // namespace qagen::corpus
