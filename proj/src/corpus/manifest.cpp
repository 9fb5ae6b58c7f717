#include "qagen/corpus/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "qagen/error.hpp"

namespace qagen::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

CorpusManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed manifest JSON: ") + e.what(), e.byte);
  }
  const fs::path base = fs::path(path).parent_path();

  CorpusManifest m;
  m.corpus_id = j.value("corpus_id", fs::path(path).stem().string());
  auto entries = j.find("entries");
  if (entries == j.end() || !entries->is_array()) {
    throw SchemaError("entries", "manifest must contain an 'entries' array");
  }
  std::set<std::string> seen;
  for (const auto& e : *entries) {
    ManifestEntry entry;
    try {
      entry.doc_id = e.at("doc_id").get<std::string>();
      entry.path = e.at("path").get<std::string>();
    } catch (const json::exception&) {
      throw SchemaError("entries", "manifest entries need string 'doc_id' and 'path'");
    }
    entry.source = e.value("source", std::string{});
    entry.region = e.value("region", std::string{});
    if (!seen.insert(entry.doc_id).second) {
      throw SchemaError("doc_id", "duplicate doc_id in manifest: " + entry.doc_id);
    }
    if (fs::path(entry.path).is_relative()) entry.path = (base / entry.path).lexically_normal().string();
    m.entries.push_back(std::move(entry));
  }
  m.totals.documents = m.entries.size();
  return m;
}

std::vector<DocumentRecord> load_corpus(const CorpusManifest& manifest) {
  std::vector<DocumentRecord> docs;
  docs.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    docs.push_back(load_document_file(e.path, e.doc_id, e.source));
    if (!e.region.empty() && !docs.back().metadata.count("region")) {
      docs.back().metadata["region"] = e.region;
    }
  }
  return docs;
}

CorpusTotals corpus_stats(const std::vector<DocumentRecord>& docs) {
  CorpusTotals t;
  t.documents = docs.size();
  for (const auto& d : docs) t.tokens += document_tokens(d);
  return t;
}

json to_json(const CorpusManifest& manifest) {
  json entries = json::array();
  for (const auto& e : manifest.entries) {
    entries.push_back({{"doc_id", e.doc_id}, {"path", e.path}, {"source", e.source}, {"region", e.region}});
  }
  return {{"corpus_id", manifest.corpus_id},
          {"entries", std::move(entries)},
          {"totals", {{"documents", manifest.totals.documents}, {"tokens", manifest.totals.tokens}}}};
}

}  // namespace qagen::corpus
