#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace qagen::corpus {

using SectionPath = std::vector<std::size_t>;

struct Author {
  std::string given_name;
  std::string surname;
  std::string name;

  bool operator==(const Author&) const = default;
};

struct Citation {
  std::string id;
  std::vector<Author> authors;
  std::string year;
  std::string title;
  std::string journal;
  std::string volume;
  std::string issue;
  std::string pages;
  // Citation keys this loader does not map, kept verbatim.
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const Citation&) const = default;
};

struct Section {
  std::string title;
  std::vector<std::string> content;
  nlohmann::json refs = nlohmann::json::array();
  SectionPath path;

  bool operator==(const Section&) const = default;
};

// A parsed document in the GROBID-style JSON layout.
//
// Top-level string fields that are not mapped onto a member (for example
// grobid_version, grobid_timestamp) land in `metadata`; unmapped non-string
// fields land in `extra`. Both are written back by to_json so that loading
// a serialized record reproduces it exactly.
struct DocumentRecord {
  std::string doc_id;
  std::string source;
  std::string title;
  std::string language_code;
  std::vector<Section> sections;
  std::vector<Citation> citations;
  std::map<std::string, std::string> metadata;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const DocumentRecord&) const = default;
};

// Parses one document. `doc_id` / `source`, when non-empty, override the
// values found in the JSON (the manifest is authoritative for both).
//
// Throws ParseError (with byte offset) on malformed JSON and SchemaError on a
// missing or mistyped required field. Empty paragraphs are dropped.
DocumentRecord load_document(std::string_view raw_json, std::string_view doc_id = {},
                             std::string_view source = {});

DocumentRecord load_document_file(const std::string& path, std::string_view doc_id = {},
                                  std::string_view source = {});

nlohmann::json to_json(const DocumentRecord& doc);
std::string serialize_document(const DocumentRecord& doc);

// Paragraphs joined with a single '\n'.
std::string flatten_section(const Section& section);

// Sum of section token counts; the unit used for corpus totals.
std::size_t document_tokens(const DocumentRecord& doc);

std::string path_to_string(const SectionPath& path);

}  // namespace qagen::corpus
