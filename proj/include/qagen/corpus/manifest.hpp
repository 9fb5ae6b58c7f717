#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qagen/corpus/document.hpp"

namespace qagen::corpus {

struct ManifestEntry {
  std::string doc_id;
  std::string path;  // resolved against the manifest's directory
  std::string source;
  std::string region;
};

struct CorpusTotals {
  std::size_t documents = 0;
  std::size_t tokens = 0;

  bool operator==(const CorpusTotals&) const = default;
};

struct CorpusManifest {
  std::string corpus_id;
  std::vector<ManifestEntry> entries;
  CorpusTotals totals;
};

// Reads the manifest JSON: {"corpus_id": ..., "entries": [{doc_id, path,
// source, region}]}. Relative paths are resolved against the manifest file's
// directory. Duplicate doc_ids are a SchemaError.
CorpusManifest load_manifest(const std::string& path);

// Loads every entry in manifest order; doc_id and source come from the entry.
std::vector<DocumentRecord> load_corpus(const CorpusManifest& manifest);

// Document count and summed section tokens.
CorpusTotals corpus_stats(const std::vector<DocumentRecord>& docs);

nlohmann::json to_json(const CorpusManifest& manifest);

}  // namespace qagen::corpus
