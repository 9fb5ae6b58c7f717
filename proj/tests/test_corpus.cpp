#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "qagen/corpus/chunker.hpp"
#include "qagen/corpus/manifest.hpp"
#include "qagen/corpus/tokenizer.hpp"
#include "qagen/error.hpp"

using namespace qagen;
using namespace qagen::corpus;
namespace fs = std::filesystem;

namespace {

const fs::path kTestData = fs::path(__FILE__).parent_path() / "data";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Word count by regex, independent of the hand-written scanner.
std::size_t regex_count(const std::string& text) {
  static const std::regex word("[A-Za-z0-9\\x80-\\xff]+('[A-Za-z0-9\\x80-\\xff]+)*");
  return std::distance(std::sregex_iterator(text.begin(), text.end(), word), std::sregex_iterator());
}

Section words_section(std::size_t n, std::size_t path = 0) {
  Section s;
  std::string para;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) para += (i % 7 == 0) ? ", " : " ";
    para += "w" + std::to_string(i);
  }
  if (n) s.content.push_back(para);
  s.path = {path};
  return s;
}

}  // namespace

TEST_CASE("tokenizer splits on punctuation and keeps apostrophes") {
  CHECK(tokenize("Farmer's soil-test, 12 plots!") ==
        std::vector<std::string>{"farmer's", "soil", "test", "12", "plots"});
  CHECK(count_tokens("") == 0);
  CHECK(count_tokens("two words") == 2);
  CHECK(count_tokens("caf\xc3\xa9 au lait") == 3);
  const std::string text = "a  bc,d";
  const auto spans = token_spans(text);
  REQUIRE(spans.size() == 3);
  CHECK(text.substr(spans[1].begin, spans[1].end - spans[1].begin) == "bc");
}

TEST_CASE("GROBID-style sample loads with citations and sections") {
  const auto doc = load_document_file((kTestData / "grobid_sample.json").string(), "sample", "bulletin");
  CHECK(doc.doc_id == "sample");
  CHECK(doc.source == "bulletin");
  CHECK(doc.language_code == "en");
  REQUIRE(doc.citations.size() == 1);
  CHECK(doc.citations[0].authors.at(0).name == "J T Abatzoglou");
  CHECK(doc.citations[0].title.rfind("A Comparison of Statistical Downscaling", 0) == 0);
  CHECK(doc.citations[0].year == "2012");
  REQUIRE(doc.sections.size() == 3);
  CHECK(doc.sections[0].title == "Introduction");
  CHECK(doc.sections[2].title.empty());
  for (std::size_t i = 0; i < 3; ++i) CHECK(doc.sections[i].path == SectionPath{i});
  CHECK(doc.metadata.at("grobid_version") == "0.7.3");
  CHECK(doc.metadata.at("grobid_timestamp") == "2023-07-04T13:05+0000");
}

TEST_CASE("serialize(load(x)) reproduces x") {
  const std::string raw = read_file(kTestData / "grobid_sample.json");
  const auto doc = load_document(raw);
  CHECK(to_json(doc) == nlohmann::json::parse(raw));
  CHECK(load_document(serialize_document(doc)) == doc);
}

TEST_CASE("empty document") {
  const auto doc = load_document(R"({"title":"","sections":[]})");
  CHECK(doc.title.empty());
  CHECK(doc.sections.empty());
  CHECK(chunk_document(doc, {}).empty());
}

TEST_CASE("load errors") {
  SUBCASE("malformed JSON carries an offset") {
    try {
      load_document(R"({"title": "x", "sections": [)");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.offset() > 0);
    }
  }
  SUBCASE("missing title names the field") {
    try {
      load_document(R"({"sections": []})");
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(e.field() == "title");
    }
  }
  SUBCASE("paragraphs must be strings") { CHECK_THROWS_AS(load_document(R"({"title":"t","sections":[{"title":"a","content":[1]}]})"), SchemaError); }
}

TEST_CASE("empty paragraphs are dropped") {
  const auto doc = load_document(R"({"title":"t","sections":[{"title":"a","content":["x","","y"]}]})");
  CHECK(doc.sections[0].content == std::vector<std::string>{"x", "y"});
}

TEST_CASE("flatten_section") {
  Section s;
  CHECK(flatten_section(s) == "");
  s.content = {"a", "b"};
  CHECK(flatten_section(s) == "a\nb");
  s.content = {"one", "second one", "3", "four four", "five!"};
  std::size_t total = 0;
  for (const auto& p : s.content) total += p.size();
  CHECK(flatten_section(s).size() == total + 4);
}

TEST_CASE("chunk counts") {
  CHECK(chunk_section("d", words_section(10), {10, 0}).size() == 1);
  CHECK(chunk_section("d", words_section(0), {10, 0}).empty());
  // Stride 300 over 1000 tokens: the window at 600 already reaches the end.
  CHECK(window_starts(1000, {400, 100}) == std::vector<std::size_t>{0, 300, 600});
  CHECK(window_starts(1001, {400, 100}) == std::vector<std::size_t>{0, 300, 600, 900});
  CHECK_THROWS_AS(window_starts(10, {10, 10}), ArgumentError);
  CHECK_THROWS_AS(window_starts(10, {0, 0}), ArgumentError);
}

TEST_CASE("chunking properties over random sections") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = rng() % 300;
    const std::size_t chunk = 1 + rng() % 60;
    const std::size_t overlap = rng() % chunk;
    const auto section = words_section(n, round);
    const auto flat = flatten_section(section);
    const auto chunks = chunk_section("doc", section, {chunk, overlap});
    CAPTURE(n);
    CAPTURE(chunk);
    CAPTURE(overlap);

    REQUIRE(chunks.size() == oracle::window_count(n, chunk, overlap));
    if (n > overlap) CHECK(chunks.size() == std::max<std::size_t>(1, (n - overlap + (chunk - overlap) - 1) / (chunk - overlap)));

    std::vector<int> covered(n, 0);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      const auto& c = chunks[i];
      CHECK(c.char_span.start < c.char_span.end);
      CHECK(flat.substr(c.char_span.start, c.char_span.end - c.char_span.start) == c.text);
      CHECK(c.token_count == count_tokens(c.text));
      CHECK(c.token_count >= 1);
      CHECK(c.section_path == section.path);
      for (std::size_t t = c.token_start; t < c.token_start + c.token_count; ++t) covered.at(t) = 1;
      if (i + 1 < chunks.size()) {
        CHECK(c.token_count == chunk);
        CHECK(chunks[i + 1].token_start + overlap == c.token_start + chunk);
      }
    }
    for (std::size_t t = 0; t < n; ++t) CHECK(covered[t] == 1);
  }
}

TEST_CASE("chunks never cross sections and round-trip through JSONL") {
  DocumentRecord doc;
  doc.doc_id = "d";
  doc.sections = {words_section(50, 0), words_section(7, 1)};
  const auto chunks = chunk_document(doc, {20, 5});
  CHECK(chunks.size() == oracle::window_count(50, 20, 5) + 1);
  CHECK(chunks.back().section_path == SectionPath{1});
  std::stringstream ss;
  write_chunks_jsonl(ss, chunks);
  CHECK(read_chunks_jsonl(ss) == chunks);
}

TEST_CASE("corpus_stats") {
  CHECK(corpus_stats({}) == CorpusTotals{0, 0});
  DocumentRecord a, b;
  a.sections = {words_section(5)};
  b.sections = {words_section(3, 0), words_section(4, 1)};
  CHECK(corpus_stats({a, b}) == CorpusTotals{2, 12});
}

TEST_CASE("bundled mini corpus totals match a regex count") {
  const auto manifest = load_manifest(std::string(QAGEN_DATA_DIR) + "/mini_corpus/manifest.json");
  const auto docs = load_corpus(manifest);
  REQUIRE(docs.size() == manifest.entries.size());
  std::size_t tokens = 0;
  for (const auto& e : manifest.entries) {
    const auto j = nlohmann::json::parse(read_file(e.path));
    for (const auto& s : j.at("sections"))
      for (const auto& p : s.at("content")) tokens += regex_count(p.get<std::string>());
  }
  const auto totals = corpus_stats(docs);
  CHECK(totals.documents == 5);
  CHECK(totals.tokens == tokens);
  CHECK(docs[0].doc_id == manifest.entries[0].doc_id);
  CHECK(docs[0].source == "Extension bulletin");
}

TEST_CASE("manifest rejects duplicate ids and resolves relative paths") {
  const fs::path dir = fs::temp_directory_path() / "qagen_manifest_test";
  fs::create_directories(dir);
  std::ofstream(dir / "doc.json") << R"({"title":"t","sections":[{"title":"s","content":["one two"]}]})";
  std::ofstream(dir / "ok.json") << R"({"corpus_id":"c","entries":[{"doc_id":"a","path":"doc.json","source":"s","region":"r"}]})";
  std::ofstream(dir / "dup.json")
      << R"({"corpus_id":"c","entries":[{"doc_id":"a","path":"doc.json"},{"doc_id":"a","path":"doc.json"}]})";
  const auto m = load_manifest((dir / "ok.json").string());
  CHECK(fs::equivalent(m.entries.at(0).path, dir / "doc.json"));
  CHECK(load_corpus(m).at(0).sections.at(0).content.at(0) == "one two");
  CHECK_THROWS_AS(load_manifest((dir / "dup.json").string()), SchemaError);
  fs::remove_all(dir);
}
