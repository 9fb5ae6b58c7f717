#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "qagen/corpus/document.hpp"

namespace qagen::corpus {

struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const CharSpan&) const = default;
};

struct Chunk {
  std::string chunk_id;
  std::string doc_id;
  SectionPath section_path;
  CharSpan char_span;  // into flatten_section() of the owning section
  std::string text;
  std::size_t token_count = 0;
  std::size_t token_start = 0;  // offset of the first token within the section

  bool operator==(const Chunk&) const = default;
};

struct ChunkingParams {
  std::size_t chunk_tokens = 400;
  std::size_t overlap_tokens = 100;
};

// Token windows over one section. Windows advance by
// chunk_tokens - overlap_tokens and stop once a window reaches the last
// token, so a section of N tokens yields max(1, ceil((N - overlap) / stride))
// chunks (zero for an empty section).
std::vector<Chunk> chunk_section(const std::string& doc_id, const Section& section,
                                 const ChunkingParams& params);

std::vector<Chunk> chunk_document(const DocumentRecord& doc, const ChunkingParams& params);

// Closed-form window starts, in token offsets.
std::vector<std::size_t> window_starts(std::size_t n_tokens, const ChunkingParams& params);

nlohmann::json to_json(const Chunk& chunk);
Chunk chunk_from_json(const nlohmann::json& j);

void write_chunks_jsonl(std::ostream& out, const std::vector<Chunk>& chunks);
std::vector<Chunk> read_chunks_jsonl(std::istream& in);

}  // namespace qagen::corpus
