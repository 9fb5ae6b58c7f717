#include "qagen/corpus/tokenizer.hpp"

#include <algorithm>

namespace qagen::corpus {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

std::vector<TokenSpan> token_spans(std::string_view text) {
  std::vector<TokenSpan> spans;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    while (i < n) {
      auto c = static_cast<unsigned char>(text[i]);
      if (is_word_byte(c)) {
        ++i;
      } else if (c == '\'' && i + 1 < n && is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
        i += 2;
      } else {
        break;
      }
    }
    spans.push_back({begin, i});
  }
  return spans;
}

std::size_t count_tokens(std::string_view text) { return token_spans(text).size(); }

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
  });
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& span : token_spans(text)) {
    out.push_back(to_lower(text.substr(span.begin, span.end - span.begin)));
  }
  return out;
}

}  // namespace qagen::corpus
