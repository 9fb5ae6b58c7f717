#include "qagen/corpus/document.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include "qagen/corpus/tokenizer.hpp"
#include "qagen/error.hpp"

namespace qagen::corpus {

using nlohmann::json;

namespace {

std::string string_field(const json& obj, const char* key, const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw SchemaError(key, context + ": field '" + key + "' must be a string");
  }
  return it->get<std::string>();
}

Author parse_author(const json& j) {
  if (j.is_string()) return {{}, {}, j.get<std::string>()};
  if (!j.is_object()) throw SchemaError("authors", "citation author must be an object or string");
  Author a;
  a.given_name = string_field(j, "given_name", "author");
  a.surname = string_field(j, "surname", "author");
  a.name = string_field(j, "name", "author");
  if (a.name.empty()) {
    a.name = a.given_name.empty() ? a.surname : a.given_name + " " + a.surname;
  }
  return a;
}

Citation parse_citation(const json& j) {
  if (!j.is_object()) throw SchemaError("citations", "citation entries must be objects");
  Citation c;
  for (const auto& [key, value] : j.items()) {
    if (key == "authors") {
      if (!value.is_array()) throw SchemaError("authors", "citation 'authors' must be an array");
      for (const auto& a : value) c.authors.push_back(parse_author(a));
    } else if (key == "id" && value.is_string()) {
      c.id = value.get<std::string>();
    } else if (key == "date" && value.is_string()) {
      c.year = value.get<std::string>();
    } else if (key == "title" && value.is_string()) {
      c.title = value.get<std::string>();
    } else if (key == "journal" && value.is_string()) {
      c.journal = value.get<std::string>();
    } else if (key == "volume" && value.is_string()) {
      c.volume = value.get<std::string>();
    } else if (key == "issue" && value.is_string()) {
      c.issue = value.get<std::string>();
    } else if (key == "pages" && value.is_string()) {
      c.pages = value.get<std::string>();
    } else {
      c.extra[key] = value;
    }
  }
  return c;
}

json citation_to_json(const Citation& c) {
  json j = c.extra;
  json authors = json::array();
  for (const auto& a : c.authors) {
    authors.push_back({{"given_name", a.given_name}, {"surname", a.surname}, {"name", a.name}});
  }
  j["authors"] = std::move(authors);
  if (!c.id.empty()) j["id"] = c.id;
  if (!c.year.empty()) j["date"] = c.year;
  if (!c.title.empty()) j["title"] = c.title;
  if (!c.journal.empty()) j["journal"] = c.journal;
  if (!c.volume.empty()) j["volume"] = c.volume;
  if (!c.issue.empty()) j["issue"] = c.issue;
  if (!c.pages.empty()) j["pages"] = c.pages;
  return j;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

Section parse_section(const json& j, std::size_t index) {
  if (!j.is_object()) throw SchemaError("sections", "section entries must be objects");
  Section s;
  s.title = string_field(j, "title", "section");
  s.path = {index};
  if (auto it = j.find("content"); it != j.end() && !it->is_null()) {
    if (it->is_string()) {
      if (!blank(it->get<std::string>())) s.content.push_back(it->get<std::string>());
    } else if (it->is_array()) {
      for (const auto& p : *it) {
        if (!p.is_string()) throw SchemaError("content", "section paragraphs must be strings");
        if (!blank(p.get<std::string>())) s.content.push_back(p.get<std::string>());
      }
    } else {
      throw SchemaError("content", "section 'content' must be an array of strings");
    }
  }
  if (auto it = j.find("refs"); it != j.end() && it->is_array()) s.refs = *it;
  return s;
}

}  // namespace

DocumentRecord load_document(std::string_view raw_json, std::string_view doc_id,
                             std::string_view source) {
  json j;
  try {
    j = json::parse(raw_json.begin(), raw_json.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed document JSON: ") + e.what(), e.byte);
  }
  if (!j.is_object()) throw SchemaError("$", "document root must be a JSON object");

  auto title_it = j.find("title");
  if (title_it == j.end() || !title_it->is_string()) {
    throw SchemaError("title", "document is missing required string field 'title'");
  }

  DocumentRecord doc;
  for (const auto& [key, value] : j.items()) {
    if (key == "title") {
      doc.title = value.get<std::string>();
    } else if (key == "doc_id" && value.is_string()) {
      doc.doc_id = value.get<std::string>();
    } else if (key == "source" && value.is_string()) {
      doc.source = value.get<std::string>();
    } else if (key == "language_code" && value.is_string()) {
      doc.language_code = value.get<std::string>();
    } else if (key == "sections") {
      if (!value.is_array()) throw SchemaError("sections", "'sections' must be an array");
      for (std::size_t i = 0; i < value.size(); ++i) doc.sections.push_back(parse_section(value[i], i));
    } else if (key == "citations") {
      if (!value.is_array()) throw SchemaError("citations", "'citations' must be an array");
      for (const auto& c : value) doc.citations.push_back(parse_citation(c));
    } else if (value.is_string()) {
      doc.metadata[key] = value.get<std::string>();
    } else {
      doc.extra[key] = value;
    }
  }
  if (!doc_id.empty()) doc.doc_id = std::string(doc_id);
  if (!source.empty()) doc.source = std::string(source);
  return doc;
}

DocumentRecord load_document_file(const std::string& path, std::string_view doc_id,
                                  std::string_view source) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open document file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_document(buf.str(), doc_id, source);
}

json to_json(const DocumentRecord& doc) {
  json j = json::object();
  for (const auto& [key, value] : doc.extra.items()) j[key] = value;
  for (const auto& [key, value] : doc.metadata) j[key] = value;
  if (!doc.doc_id.empty()) j["doc_id"] = doc.doc_id;
  if (!doc.source.empty()) j["source"] = doc.source;
  j["title"] = doc.title;
  if (!doc.language_code.empty()) j["language_code"] = doc.language_code;
  json sections = json::array();
  for (const auto& s : doc.sections) {
    sections.push_back({{"title", s.title}, {"content", s.content}, {"refs", s.refs}});
  }
  j["sections"] = std::move(sections);
  json citations = json::array();
  for (const auto& c : doc.citations) citations.push_back(citation_to_json(c));
  j["citations"] = std::move(citations);
  return j;
}

std::string serialize_document(const DocumentRecord& doc) { return to_json(doc).dump(2); }

std::string flatten_section(const Section& section) {
  std::string out;
  for (std::size_t i = 0; i < section.content.size(); ++i) {
    if (i) out.push_back('\n');
    out += section.content[i];
  }
  return out;
}

std::size_t document_tokens(const DocumentRecord& doc) {
  return std::accumulate(doc.sections.begin(), doc.sections.end(), std::size_t{0},
                         [](std::size_t acc, const Section& s) {
                           return acc + count_tokens(flatten_section(s));
                         });
}

std::string path_to_string(const SectionPath& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out.push_back('.');
    out += std::to_string(path[i]);
  }
  return out;
}

}  // namespace qagen::corpus
