#include "qagen/corpus/chunker.hpp"

#include <istream>
#include <ostream>

#include "qagen/corpus/tokenizer.hpp"
#include "qagen/error.hpp"

namespace qagen::corpus {

using nlohmann::json;

namespace {

void check_params(const ChunkingParams& params) {
  if (params.chunk_tokens < 1) throw ArgumentError("chunk_tokens must be >= 1");
  if (params.overlap_tokens >= params.chunk_tokens) {
    throw ArgumentError("overlap_tokens (" + std::to_string(params.overlap_tokens) +
                        ") must be smaller than chunk_tokens (" +
                        std::to_string(params.chunk_tokens) + ")");
  }
}

}  // namespace

std::vector<std::size_t> window_starts(std::size_t n_tokens, const ChunkingParams& params) {
  check_params(params);
  std::vector<std::size_t> starts;
  if (n_tokens == 0) return starts;
  const std::size_t stride = params.chunk_tokens - params.overlap_tokens;
  for (std::size_t start = 0;; start += stride) {
    starts.push_back(start);
    if (start + params.chunk_tokens >= n_tokens) break;
  }
  return starts;
}

std::vector<Chunk> chunk_section(const std::string& doc_id, const Section& section,
                                 const ChunkingParams& params) {
  const std::string flat = flatten_section(section);
  const auto spans = token_spans(flat);
  std::vector<Chunk> chunks;
  const auto starts = window_starts(spans.size(), params);
  chunks.reserve(starts.size());
  for (std::size_t ordinal = 0; ordinal < starts.size(); ++ordinal) {
    const std::size_t first = starts[ordinal];
    const std::size_t last = std::min(first + params.chunk_tokens, spans.size()) - 1;
    Chunk c;
    c.doc_id = doc_id;
    c.section_path = section.path;
    c.chunk_id = doc_id + ":s" + path_to_string(section.path) + ":c" + std::to_string(ordinal);
    c.char_span = {spans[first].begin, spans[last].end};
    c.text = flat.substr(c.char_span.start, c.char_span.end - c.char_span.start);
    c.token_count = last - first + 1;
    c.token_start = first;
    chunks.push_back(std::move(c));
  }
  return chunks;
}

std::vector<Chunk> chunk_document(const DocumentRecord& doc, const ChunkingParams& params) {
  check_params(params);
  std::vector<Chunk> out;
  for (const auto& section : doc.sections) {
    auto chunks = chunk_section(doc.doc_id, section, params);
    out.insert(out.end(), std::make_move_iterator(chunks.begin()),
               std::make_move_iterator(chunks.end()));
  }
  return out;
}

json to_json(const Chunk& chunk) {
  return {{"chunk_id", chunk.chunk_id},
          {"doc_id", chunk.doc_id},
          {"section_path", chunk.section_path},
          {"char_span", {chunk.char_span.start, chunk.char_span.end}},
          {"text", chunk.text},
          {"token_count", chunk.token_count},
          {"token_start", chunk.token_start}};
}

Chunk chunk_from_json(const json& j) {
  try {
    Chunk c;
    c.chunk_id = j.at("chunk_id").get<std::string>();
    c.doc_id = j.at("doc_id").get<std::string>();
    c.section_path = j.at("section_path").get<SectionPath>();
    const auto& span = j.at("char_span");
    c.char_span = {span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()};
    c.text = j.at("text").get<std::string>();
    c.token_count = j.at("token_count").get<std::size_t>();
    c.token_start = j.value("token_start", std::size_t{0});
    return c;
  } catch (const json::exception& e) {
    throw SchemaError("chunk", std::string("invalid chunk record: ") + e.what());
  }
}

void write_chunks_jsonl(std::ostream& out, const std::vector<Chunk>& chunks) {
  for (const auto& c : chunks) out << to_json(c).dump() << '\n';
}

std::vector<Chunk> read_chunks_jsonl(std::istream& in) {
  std::vector<Chunk> chunks;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed chunk line: ") + e.what(), offset + e.byte);
      }
      chunks.push_back(chunk_from_json(j));
    }
    offset += line.size() + 1;
  }
  return chunks;
}

}  // namespace qagen::corpus
