#include "qagen/pipeline/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "qagen/corpus/chunker.hpp"
#include "qagen/corpus/manifest.hpp"
#include "qagen/corpus/tokenizer.hpp"
#include "qagen/digest.hpp"
#include "qagen/genesis/context.hpp"
#include "qagen/genesis/cross_region.hpp"
#include "qagen/genesis/finetune.hpp"
#include "qagen/genesis/generation.hpp"
#include "qagen/genesis/prompts.hpp"
#include "qagen/index/recall.hpp"
#include "qagen/index/vector_index.hpp"
#include "qagen/judge/judges.hpp"
#include "qagen/judge/report.hpp"
#include "qagen/judge/variance.hpp"
#include "qagen/llm/fixtures.hpp"
#include "qagen/llm/http.hpp"
#include "qagen/parallel.hpp"
#include "qagen/pipeline/errors.hpp"
#include "qagen/pipeline/offline.hpp"
#include "qagen/pipeline/report_tables.hpp"
#include "qagen/textmetrics/details.hpp"
#include "qagen/textmetrics/distribution.hpp"
#include "qagen/textmetrics/diversity.hpp"

namespace qagen::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<json> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ":" + std::to_string(n) + ": " + e.what(), e.byte);
    }
  }
  return rows;
}

void write_jsonl(const fs::path& path, const std::vector<json>& rows) {
  auto out = open_out(path);
  for (const auto& r : rows) out << r.dump() << '\n';
}

std::vector<genesis::QAPair> read_pairs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return genesis::read_qa_jsonl(in);
}

void write_pairs(const fs::path& path, std::span<const genesis::QAPair> pairs) {
  auto out = open_out(path);
  genesis::write_qa_jsonl(out, pairs);
}

std::string now_iso() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string pair_section_key(const genesis::QAPair& p) {
  return p.doc_id + ":s" + corpus::path_to_string(p.section_path);
}

textmetrics::KlDirection parse_direction(const std::string& name) {
  if (name == "source||questions") return textmetrics::KlDirection::SourceToQuestions;
  if (name == "questions||source") return textmetrics::KlDirection::QuestionsToSource;
  throw ConfigError("unknown kl_direction '" + name + "'");
}

// Which command writes each run-directory file.
const std::map<std::string, std::string>& producers() {
  static const std::map<std::string, std::string> m = {
      {"documents.jsonl", "ingest"},     {"corpus.json", "ingest"},           {"chunks.jsonl", "chunk"},
      {"index.jsonl", "index"},          {"tags.jsonl", "tag"},               {"questions.jsonl", "genq"},
      {"combined.jsonl", "genq"},        {"qa_pairs.jsonl", "gena"},          {"metrics.jsonl", "metrics"},
      {"verdicts.jsonl", "judge"},       {"guidelines.jsonl", "judge"},       {"eval_answers.jsonl", "judge"},
      {"variance.jsonl", "judge"},       {"recall.csv", "recall"},            {"recall_outcomes.jsonl", "recall"},
      {"growth.csv", "ablate"},          {"finetune.jsonl", "export-ft"},     {"finetune_rejects.jsonl", "export-ft"},
      {"clusters.jsonl", "export-ft"},   {"heldout.jsonl", "export-ft"}};
  return m;
}

struct StageDef {
  std::vector<std::string> requires_files;
  std::vector<std::string> optional_files;  // digested when present
  std::vector<std::string> outputs;
};

const std::map<std::string, StageDef>& stage_defs() {
  static const std::map<std::string, StageDef> m = {
      {"ingest", {{}, {}, {"documents.jsonl", "corpus.json"}}},
      {"chunk", {{"documents.jsonl"}, {}, {"chunks.jsonl"}}},
      {"index", {{"chunks.jsonl"}, {}, {"index.jsonl"}}},
      {"tag", {{"documents.jsonl", "chunks.jsonl"}, {}, {"tags.jsonl"}}},
      {"genq", {{"documents.jsonl", "chunks.jsonl", "tags.jsonl"}, {}, {"questions.jsonl", "combined.jsonl"}}},
      {"gena", {{"questions.jsonl", "chunks.jsonl", "index.jsonl"}, {}, {"qa_pairs.jsonl"}}},
      {"metrics", {{"documents.jsonl", "qa_pairs.jsonl", "combined.jsonl"}, {}, {"metrics.jsonl"}}},
      {"judge",
       {{"documents.jsonl", "chunks.jsonl", "index.jsonl", "qa_pairs.jsonl", "combined.jsonl"},
        {},
        {"verdicts.jsonl", "guidelines.jsonl", "eval_answers.jsonl", "variance.jsonl"}}},
      {"recall", {{"questions.jsonl", "index.jsonl"}, {}, {"recall.csv", "recall_outcomes.jsonl"}}},
      {"ablate", {{"questions.jsonl", "index.jsonl", "chunks.jsonl"}, {}, {"growth.csv"}}},
      {"export-ft",
       {{"qa_pairs.jsonl", "combined.jsonl"},
        {},
        {"finetune.jsonl", "finetune_rejects.jsonl", "clusters.jsonl", "heldout.jsonl"}}},
      {"report",
       {{},
        {"qa_pairs.jsonl", "questions.jsonl", "combined.jsonl", "metrics.jsonl", "verdicts.jsonl", "recall.csv",
         "growth.csv"},
        {"report/report.md", "report/question_metrics.csv", "report/answer_metrics.csv", "report/judge_report.csv",
         "report/recall.csv", "report/growth.csv"}}}};
  return m;
}

}  // namespace

json to_json(const StageArtifact& a) {
  return {{"stage", a.stage}, {"input_digests", a.input_digests}, {"outputs", a.outputs}, {"complete", a.complete}};
}

StageArtifact artifact_from_json(const json& j) {
  StageArtifact a;
  a.stage = j.at("stage").get<std::string>();
  a.input_digests = j.at("input_digests").get<std::map<std::string, std::string>>();
  a.outputs = j.at("outputs").get<std::vector<std::string>>();
  a.complete = j.at("complete").get<bool>();
  return a;
}

std::string file_digest(const fs::path& path) {
  if (!fs::is_regular_file(path)) return {};
  return sha256_hex(slurp(path));
}

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> v = {"ingest", "chunk",  "index",  "tag",       "genq",  "gena",
                                             "metrics", "judge", "recall", "ablate", "export-ft", "report"};
  return v;
}

std::shared_ptr<llm::ChatBackend> make_backend(const BackendSpec& spec) {
  if (spec.kind == "offline") return make_offline_backend();
  if (spec.kind == "replay")
    return std::make_shared<llm::ReplayBackend>(std::make_shared<llm::FixtureStore>(spec.fixtures_dir));
  if (spec.kind == "record")
    return std::make_shared<llm::RecordingBackend>(std::make_shared<llm::HttpChatBackend>(spec.http),
                                                   std::make_shared<llm::FixtureStore>(spec.fixtures_dir));
  if (spec.kind == "http") return std::make_shared<llm::HttpChatBackend>(spec.http);
  throw ConfigError("unknown backend kind '" + spec.kind + "'");
}

std::unique_ptr<llm::Embedder> make_embedder(const EmbedderSpec& spec, std::uint64_t seed) {
  if (spec.kind == "hash") return std::make_unique<llm::HashEmbedder>(spec.dims, seed);
  if (spec.kind == "file") return std::make_unique<llm::FileEmbedder>(spec.path);
  if (spec.kind == "http") return std::make_unique<llm::HttpEmbedder>(spec.http, spec.model);
  throw ConfigError("unknown embedder kind '" + spec.kind + "'");
}

std::vector<std::string> write_default_templates(const fs::path& dir) {
  static const std::set<std::string> verbatim{"tag", "question"};
  fs::create_directories(dir);
  std::vector<std::string> ids;
  for (const auto& set : {genesis::default_templates(), judge::default_judge_templates()}) {
    for (const auto& id : set.ids()) {
      auto out = open_out(dir / (id + ".tmpl"));
      if (!verbatim.count(id)) out << "{{! reconstructed template; the wording is editable }}\n";
      out << set.source(id);
      if (set.source(id).empty() || set.source(id).back() != '\n') out << '\n';
      ids.push_back(id);
    }
  }
  return ids;
}

struct Pipeline::Impl {
  Pipeline& owner;
  std::map<std::string, std::unique_ptr<llm::LlmClient>> clients;
  std::unique_ptr<llm::Embedder> embedder_;
  std::optional<llm::TemplateSet> gen_templates_;
  std::optional<llm::TemplateSet> judge_templates_;

  explicit Impl(Pipeline& p) : owner(p) {}

  const PipelineConfig& cfg() const { return owner.config_; }
  fs::path file(const std::string& name) const { return owner.run_dir() / name; }

  llm::LlmClient& client(const BackendSpec& spec) {
    const std::string key = to_json(spec).dump();
    auto it = clients.find(key);
    if (it == clients.end()) {
      auto backend = owner.options_.backend_factory ? owner.options_.backend_factory(spec) : make_backend(spec);
      llm::RetryPolicy policy;
      policy.max_attempts = spec.max_attempts;
      auto c = std::make_unique<llm::LlmClient>(std::move(backend), owner.ledger_, policy, spec.max_in_flight);
      c->set_default_model(spec.model);
      it = clients.emplace(key, std::move(c)).first;
    }
    return *it->second;
  }

  llm::Embedder& embedder() {
    if (!embedder_) embedder_ = make_embedder(cfg().embedder, cfg().seed);
    return *embedder_;
  }

  const llm::TemplateSet& gen_templates() {
    if (!gen_templates_) {
      gen_templates_ = genesis::default_templates();
      if (!cfg().templates_dir.empty()) gen_templates_->load_directory(cfg().templates_dir);
    }
    return *gen_templates_;
  }

  const llm::TemplateSet& judge_templates() {
    if (!judge_templates_) {
      judge_templates_ = judge::default_judge_templates();
      if (!cfg().templates_dir.empty()) judge_templates_->load_directory(cfg().templates_dir);
    }
    return *judge_templates_;
  }

  std::vector<std::string> examples() const {
    if (cfg().examples_file.empty()) return genesis::default_examples();
    std::vector<std::string> out;
    std::istringstream in(slurp(cfg().examples_file));
    std::string line;
    while (std::getline(in, line)) {
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      const auto e = line.find_last_not_of(" \t\r");
      out.push_back(line.substr(b, e - b + 1));
    }
    return out;
  }

  void log(json event) {
    event["time"] = now_iso();
    const auto path = file("logs/run_log.jsonl");
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::app);
    out << event.dump() << '\n';
  }

  // ---- shared readers ----

  std::vector<corpus::DocumentRecord> documents() const {
    std::vector<corpus::DocumentRecord> docs;
    for (const auto& row : read_jsonl(file("documents.jsonl"))) docs.push_back(corpus::load_document(row.dump()));
    return docs;
  }

  std::vector<corpus::Chunk> chunks() const {
    std::ifstream in(file("chunks.jsonl"));
    return corpus::read_chunks_jsonl(in);
  }

  std::vector<genesis::SectionInput> sections() const {
    const auto docs = documents();
    const auto all_chunks = chunks();
    std::vector<genesis::SectionInput> out;
    for (const auto& doc : docs) {
      std::vector<corpus::Chunk> mine;
      for (const auto& c : all_chunks)
        if (c.doc_id == doc.doc_id) mine.push_back(c);
      for (auto& s : genesis::section_inputs(doc, mine))
        if (!s.section.content.empty()) out.push_back(std::move(s));
    }
    return out;
  }

  std::map<std::string, std::string> section_texts() const {
    std::map<std::string, std::string> out;
    for (const auto& doc : documents())
      for (const auto& s : doc.sections)
        out[doc.doc_id + ":s" + corpus::path_to_string(s.path)] = corpus::flatten_section(s);
    return out;
  }

  genesis::ChunkTexts chunk_texts() const {
    genesis::ChunkTexts out;
    for (const auto& c : chunks()) out.emplace(c.chunk_id, c.text);
    return out;
  }

  // ---- stages ----

  void ingest() {
    const auto manifest = corpus::load_manifest(cfg().corpus_manifest.string());
    const auto docs = corpus::load_corpus(manifest);
    std::vector<json> rows;
    for (const auto& d : docs) rows.push_back(corpus::to_json(d));
    write_jsonl(file("documents.jsonl"), rows);
    const auto totals = corpus::corpus_stats(docs);
    json meta = {{"corpus_id", manifest.corpus_id},
                 {"documents", totals.documents},
                 {"tokens", totals.tokens},
                 {"manifest", corpus::to_json(manifest)}};
    open_out(file("corpus.json")) << meta.dump(2) << '\n';
  }

  void chunk() {
    std::vector<corpus::Chunk> all;
    for (const auto& d : documents()) {
      auto c = corpus::chunk_document(d, cfg().chunking);
      all.insert(all.end(), std::make_move_iterator(c.begin()), std::make_move_iterator(c.end()));
    }
    auto out = open_out(file("chunks.jsonl"));
    corpus::write_chunks_jsonl(out, all);
  }

  void build_index() {
    const auto all = chunks();
    const auto idx = index::build_index(all, embedder(), 4);
    idx.save(file("index.jsonl"));
  }

  void tag() {
    const auto secs = sections();
    auto& c = client(cfg().generation);
    std::vector<json> rows(secs.size());
    parallel_for(secs.size(), c.max_in_flight(), [&](std::size_t i) {
      const auto& s = secs[i];
      const std::string key = genesis::section_key(s);
      json row = {{"item", key}, {"doc_id", s.doc_id}, {"section_path", s.section.path}};
      try {
        row["tags"] = genesis::to_json(
            genesis::extract_supporting_context(corpus::flatten_section(s.section), c, gen_templates(), key));
      } catch (const ParseError& e) {
        spdlog::warn("tagging {} failed: {}", key, e.what());
        row["tags"] = genesis::to_json(genesis::SupportingContext{});
        row["error"] = e.what();
      }
      rows[i] = std::move(row);
    });
    write_jsonl(file("tags.jsonl"), rows);
  }

  genesis::ContextMode mode_for(const genesis::SectionInput& s, const std::map<std::string, genesis::SupportingContext>& tags) {
    const std::string& mode = cfg().context_mode;
    if (mode == "context") {
      if (s.region.empty()) {
        spdlog::warn("{} has no region; generating without context", genesis::section_key(s));
        return genesis::NoContext{};
      }
      return genesis::region_context(s.region);
    }
    if (mode == "external_context") {
      const auto it = tags.find(genesis::section_key(s));
      return genesis::ExternalContext{it == tags.end() ? genesis::SupportingContext{} : it->second};
    }
    return genesis::NoContext{};
  }

  void genq() {
    const auto secs = sections();
    std::map<std::string, genesis::SupportingContext> tags;
    for (const auto& row : read_jsonl(file("tags.jsonl")))
      tags[row.at("item").get<std::string>()] = genesis::supporting_context_from_json(row.at("tags"));
    const auto ex = examples();
    auto& c = client(cfg().generation);
    std::vector<std::vector<genesis::QAPair>> separated(secs.size()), combined(secs.size());
    parallel_for(secs.size(), c.max_in_flight(), [&](std::size_t i) {
      const auto mode = mode_for(secs[i], tags);
      const std::string key = genesis::section_key(secs[i]);
      try {
        separated[i] = genesis::generate_questions(secs[i], mode, c, ex, gen_templates());
      } catch (const genesis::GenerationError& e) {
        spdlog::warn("no questions for {}: {}", key, e.what());
      }
      if (!cfg().combined) return;
      try {
        combined[i] = genesis::generate_combined(secs[i], mode, c, ex, gen_templates());
      } catch (const genesis::GenerationError& e) {
        spdlog::warn("no combined pairs for {}: {}", key, e.what());
      }
    });
    std::vector<genesis::QAPair> q, p;
    for (std::size_t i = 0; i < secs.size(); ++i) {
      q.insert(q.end(), separated[i].begin(), separated[i].end());
      p.insert(p.end(), combined[i].begin(), combined[i].end());
    }
    write_pairs(file("questions.jsonl"), q);
    write_pairs(file("combined.jsonl"), p);
  }

  void gena() {
    auto pairs = read_pairs(file("questions.jsonl"));
    const auto idx = index::VectorIndex::load(file("index.jsonl"));
    const auto texts = chunk_texts();
    auto& c = client(cfg().generation);
    parallel_for(pairs.size(), c.max_in_flight(), [&](std::size_t i) {
      genesis::answer_pair(pairs[i], idx, texts, embedder(), c, gen_templates(), cfg().k);
    });
    write_pairs(file("qa_pairs.jsonl"), pairs);
  }

  void metrics() {
    const auto texts = section_texts();
    const std::set<std::string> enabled(cfg().metrics.begin(), cfg().metrics.end());
    std::vector<std::vector<genesis::QAPair>> sets = {read_pairs(file("qa_pairs.jsonl")),
                                                      read_pairs(file("combined.jsonl"))};

    std::optional<textmetrics::WordEmbeddingTable> table;
    if (enabled.count("diversity")) {
      if (cfg().word_vectors.kind == "file") {
        table = textmetrics::WordEmbeddingTable::load_text(cfg().word_vectors.path);
      } else {
        std::vector<std::string> all;
        for (const auto& set : sets)
          for (const auto& p : set) all.push_back(p.question);
        const auto vocab = textmetrics::union_vocabulary(all);
        table = textmetrics::WordEmbeddingTable::synthetic(vocab, cfg().word_vectors.dims, cfg().seed);
      }
    }
    const auto direction = parse_direction(cfg().kl_direction);

    std::vector<json> rows;
    for (const auto& set : sets) {
      std::vector<std::string> order;
      std::map<std::string, std::vector<const genesis::QAPair*>> groups;
      for (const auto& p : set) {
        const auto key = pair_section_key(p);
        if (!groups.count(key)) order.push_back(key);
        groups[key].push_back(&p);
      }
      for (const auto& key : order) {
        const auto& members = groups[key];
        const auto& first = *members.front();
        const json base = {{"item", key},
                           {"generation", genesis::generation_name(first.generation)},
                           {"context_mode", first.context_mode},
                           {"model_label", first.model_label}};
        std::vector<std::string> questions;
        for (const auto* p : members) questions.push_back(p->question);
        std::string joined;
        for (const auto& q : questions) joined += q + "\x1f";
        const auto src = texts.find(key);
        const std::string source = src == texts.end() ? std::string{} : src->second;

        if (enabled.count("overlap") && !source.empty()) {
          const auto r = textmetrics::overlap_score(source, questions, direction, cfg().overlap_smoothing);
          textmetrics::MetricRecord rec{"overlap", r.value, base, sha256_hex(source + "\x1e" + joined)};
          rec.parameters["direction"] = textmetrics::direction_name(r.direction);
          rec.parameters["smoothing"] = r.smoothing;
          rec.parameters["vocab_size"] = r.vocab_size;
          rec.parameters["questions"] = questions.size();
          rows.push_back(textmetrics::to_json(rec));
        }
        if (enabled.count("diversity") && questions.size() >= 2) {
          std::vector<std::string> labels;
          for (const auto* p : members) labels.push_back(p->qa_id);
          try {
            const auto r = textmetrics::diversity_score(questions, *table, labels, 4);
            textmetrics::MetricRecord rec{"diversity", r.score, base, sha256_hex(joined)};
            rec.parameters["questions"] = questions.size();
            rec.parameters["word_vectors"] = cfg().word_vectors.kind;
            rec.parameters["dims"] = table->dims();
            rows.push_back(textmetrics::to_json(rec));
          } catch (const textmetrics::OovError& e) {
            spdlog::warn("diversity skipped for {}: {}", key, e.what());
          }
        }
        if (enabled.count("details")) {
          for (const auto* p : members) {
            const auto d = textmetrics::details(p->question, p->answer.value_or(""));
            json params = base;
            params["item"] = p->qa_id;
            params["section"] = key;
            params["question_tokens"] = d.question_tokens;
            params["answer_tokens"] = d.answer_tokens;
            textmetrics::MetricRecord rec{"details", static_cast<double>(d.question_tokens + d.answer_tokens),
                                          params, sha256_hex(p->question + "\x1e" + p->answer.value_or(""))};
            rows.push_back(textmetrics::to_json(rec));
          }
        }
      }
    }
    write_jsonl(file("metrics.jsonl"), rows);
  }

  struct JudgeTask {
    std::string metric;
    std::string item;
    std::string subject;
    bool fine_tuned = false;
    bool rag = false;
    std::function<judge::JudgeVerdict(int)> op;
  };

  void judge() {
    const auto texts = section_texts();
    const auto ctexts = chunk_texts();
    const auto separated = read_pairs(file("qa_pairs.jsonl"));
    const auto combined = read_pairs(file("combined.jsonl"));
    const auto idx = index::VectorIndex::load(file("index.jsonl"));
    const std::size_t trials = cfg().judge.trials;

    auto& qclient = client(cfg().judge.question_backend);
    auto& eclient = client(cfg().judge.eval_backend);
    const judge::JudgeEnv qenv{&qclient, &judge_templates(), {}};
    const judge::JudgeEnv eenv{&eclient, &judge_templates(), {}};

    const auto section_of = [&](const genesis::QAPair& p) {
      const auto it = texts.find(pair_section_key(p));
      return it == texts.end() ? std::string{} : it->second;
    };

    std::vector<JudgeTask> tasks;
    const std::set<std::string> qm(cfg().judge.question_metrics.begin(), cfg().judge.question_metrics.end());
    const std::set<std::string> am(cfg().judge.answer_metrics.begin(), cfg().judge.answer_metrics.end());
    const std::set<std::string> em(cfg().judge.eval_metrics.begin(), cfg().judge.eval_metrics.end());

    for (const auto* set : {&separated, &combined}) {
      for (const auto& p : *set) {
        const std::string ctx = section_of(p);
        auto add = [&](const std::string& metric, std::function<judge::JudgeVerdict(int)> op, bool rag) {
          tasks.push_back({metric, p.qa_id, p.model_label, false, rag, std::move(op)});
        };
        if (qm.count("relevance"))
          add("relevance", [&, q = p.question, ctx](int t) { return judge::rate_question_relevance(q, ctx, qenv, t); },
              false);
        if (qm.count("global_relevance"))
          add("global_relevance",
              [&, q = p.question](int t) { return judge::rate_question_global_relevance(q, qenv, t); }, false);
        if (qm.count("coverage") && p.answer)
          add("coverage",
              [&, q = p.question, a = *p.answer, ctx](int t) { return judge::rate_coverage(q, a, ctx, qenv, t); },
              false);
        if (qm.count("fluency"))
          add("fluency", [&, q = p.question](int t) { return judge::rate_fluency(q, qenv, t); }, false);

        if (set != &separated || !p.answer) continue;
        std::string retrieved;
        for (const auto& id : p.retrieved_chunk_ids) {
          const auto it = ctexts.find(id);
          if (it != ctexts.end()) retrieved += (retrieved.empty() ? "" : "\n\n") + it->second;
        }
        const std::pair<const char*, judge::AnswerMetric> answer_metrics[] = {
            {"coherence", judge::AnswerMetric::Coherence},
            {"answer_relevance", judge::AnswerMetric::Relevance},
            {"groundedness", judge::AnswerMetric::Groundedness}};
        for (const auto& [name, m] : answer_metrics) {
          if (!am.count(name)) continue;
          add(name,
              [&, m, q = p.question, a = *p.answer, retrieved, ctx](int t) {
                return judge::rate_answer(m, q, a, retrieved, ctx, qenv, t);
              },
              true);
        }
      }
    }

    // Model evaluation: reference pairs, one guideline each, then every
    // subject answers with and without retrieval.
    std::vector<genesis::QAPair> refs;
    for (const auto* set : {&combined, &separated}) {
      for (const auto& p : *set)
        if (p.answer && !p.answer->empty()) refs.push_back(p);
      if (!refs.empty()) break;
    }
    if (cfg().judge.max_eval_items > 0 && refs.size() > cfg().judge.max_eval_items)
      refs.resize(cfg().judge.max_eval_items);

    std::vector<std::optional<judge::EvalGuideline>> guidelines(refs.size());
    if (em.count("guideline")) {
      parallel_for(refs.size(), eclient.max_in_flight(), [&](std::size_t i) {
        try {
          guidelines[i] = judge::make_guideline(refs[i].question, *refs[i].answer, eenv);
        } catch (const ParseError& e) {
          spdlog::warn("no guideline for {}: {}", refs[i].qa_id, e.what());
        }
      });
    }
    std::vector<json> guideline_rows;
    for (std::size_t i = 0; i < refs.size(); ++i)
      if (guidelines[i]) {
        json row = judge::to_json(*guidelines[i]);
        row["qa_id"] = refs[i].qa_id;
        guideline_rows.push_back(std::move(row));
      }

    struct EvalAnswer {
      std::size_t ref = 0;
      const SubjectSpec* subject = nullptr;
      bool rag = false;
      std::string answer;
      std::vector<std::string> retrieved;
    };
    std::vector<EvalAnswer> answers;
    for (std::size_t i = 0; i < refs.size(); ++i)
      for (const auto& s : cfg().judge.subjects)
        for (bool rag : {false, true}) answers.push_back({i, &s, rag, {}, {}});
    for (const auto& s : cfg().judge.subjects) client(s.backend);
    parallel_for(answers.size(), eclient.max_in_flight(), [&](std::size_t i) {
      auto& a = answers[i];
      auto& sc = client(a.subject->backend);
      const auto& ref = refs[a.ref];
      if (a.rag) {
        auto r = genesis::generate_answer_rag(ref.question, idx, ctexts, embedder(), sc, gen_templates(), cfg().k,
                                              "eval_rag", ref.qa_id);
        a.answer = std::move(r.answer);
        for (const auto& h : r.hits) a.retrieved.push_back(h.chunk_id);
      } else {
        a.answer = genesis::generate_answer_direct(ref.question, sc, gen_templates(), "eval_answer", ref.qa_id);
      }
    });
    std::vector<json> answer_rows;
    for (const auto& a : answers) {
      answer_rows.push_back({{"qa_id", refs[a.ref].qa_id},
                             {"subject", a.subject->label},
                             {"fine_tuned", a.subject->fine_tuned},
                             {"rag", a.rag},
                             {"answer", a.answer},
                             {"retrieved_chunk_ids", a.retrieved}});
      const auto& ref = refs[a.ref];
      auto add = [&](const std::string& metric, std::function<judge::JudgeVerdict(int)> op) {
        tasks.push_back({metric, ref.qa_id, a.subject->label, a.subject->fine_tuned, a.rag, std::move(op)});
      };
      if (em.count("guideline") && guidelines[a.ref])
        add("guideline", [&, ans = a.answer, g = *guidelines[a.ref]](int t) {
          return judge::score_with_guideline(ans, g, eenv, t);
        });
      if (em.count("succinctness"))
        add("succinctness", [&, ans = a.answer, r = *ref.answer](int t) {
          return judge::rate_succinctness(ans, r, eenv, t);
        });
      if (em.count("correctness"))
        add("correctness", [&, ans = a.answer, r = *ref.answer](int t) {
          return judge::rate_correctness(ans, r, eenv, t);
        });
    }

    std::vector<std::vector<judge::JudgeVerdict>> results(tasks.size());
    parallel_for(tasks.size(), std::max(qclient.max_in_flight(), eclient.max_in_flight()), [&](std::size_t i) {
      const auto& t = tasks[i];
      auto& out = results[i];
      for (std::size_t trial = 0; trial < trials; ++trial) {
        auto v = t.op(static_cast<int>(trial));
        v.item_id = t.item;
        v.subject = t.subject;
        v.fine_tuned = t.fine_tuned;
        v.rag = t.rag;
        out.push_back(std::move(v));
      }
    });

    std::vector<json> verdict_rows, variance_rows;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      for (const auto& v : results[i]) verdict_rows.push_back(judge::to_json(v));
      const auto report = judge::summarize_trials(results[i], tasks[i].item);
      if (report.parsed == 0) spdlog::warn("all {} trials of {} on {} were unparseable", trials, tasks[i].metric, tasks[i].item);
      json row = judge::to_json(report);
      row["subject"] = tasks[i].subject;
      row["fine_tuned"] = tasks[i].fine_tuned;
      row["rag"] = tasks[i].rag;
      variance_rows.push_back(std::move(row));
    }
    write_jsonl(file("verdicts.jsonl"), verdict_rows);
    write_jsonl(file("guidelines.jsonl"), guideline_rows);
    write_jsonl(file("eval_answers.jsonl"), answer_rows);
    write_jsonl(file("variance.jsonl"), variance_rows);
  }

  std::vector<index::Probe> probes(const index::VectorIndex& idx) {
    std::vector<index::Probe> out;
    for (const auto& p : read_pairs(file("questions.jsonl"))) {
      if (p.provenance_chunk_ids.size() != 1 || !idx.contains(p.provenance_chunk_ids.front())) continue;
      out.push_back({p.qa_id, index::embed(p.question, embedder()), p.provenance_chunk_ids.front()});
    }
    return out;
  }

  void recall() {
    const auto idx = index::VectorIndex::load(file("index.jsonl"));
    const auto ps = probes(idx);
    const auto reports = index::recall_sweep(idx, ps, cfg().recall_ks);
    {
      auto out = open_out(file("recall.csv"));
      index::write_recall_csv(out, reports);
    }
    std::vector<json> rows;
    for (const auto& r : reports)
      for (const auto& o : r.outcomes)
        rows.push_back({{"k", r.k},
                        {"question_id", o.question_id},
                        {"truth_chunk_id", o.truth_chunk_id},
                        {"hit", o.hit},
                        {"rank", o.rank}});
    write_jsonl(file("recall_outcomes.jsonl"), rows);
  }

  void ablate() {
    const auto idx = index::VectorIndex::load(file("index.jsonl"));
    const auto all = chunks();
    const auto ps = probes(idx);
    std::vector<index::IndexEntry> base;
    for (std::size_t i = 0; i < idx.size(); ++i) base.emplace_back(idx.ids()[i], idx.vectors()[i]);

    std::vector<std::size_t> order(all.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(cfg().seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::bernoulli_distribution drop(cfg().distractor_drop);

    std::vector<std::vector<index::IndexEntry>> batches;
    std::size_t made = 0;
    for (double f : cfg().growth_factors) {
      const auto target = static_cast<std::size_t>(std::llround((f - 1.0) * static_cast<double>(base.size())));
      std::vector<index::IndexEntry> batch;
      for (; made < target && !all.empty(); ++made) {
        const auto& src = all[order[made % order.size()]];
        std::string text;
        for (const auto& t : corpus::tokenize(src.text))
          if (!drop(rng)) text += (text.empty() ? "" : " ") + t;
        if (text.empty()) text = src.text;
        batch.emplace_back(src.chunk_id + "#d" + std::to_string(made), index::embed(text, embedder()));
      }
      batches.push_back(std::move(batch));
    }
    const auto points = index::index_growth_ablation(base, batches, ps, cfg().k);
    auto out = open_out(file("growth.csv"));
    index::write_growth_csv(out, points);
  }

  void export_ft() {
    std::vector<genesis::QAPair> pairs;
    const auto& src = cfg().finetune_source;
    if (src == "separated" || src == "both") {
      auto p = read_pairs(file("qa_pairs.jsonl"));
      pairs.insert(pairs.end(), p.begin(), p.end());
    }
    if (src == "combined" || src == "both") {
      auto p = read_pairs(file("combined.jsonl"));
      pairs.insert(pairs.end(), p.begin(), p.end());
    }
    genesis::PairsByRegion by_region;
    for (const auto& p : pairs)
      if (!p.region.empty()) by_region[p.region].push_back(p);
    std::vector<genesis::QuestionCluster> clusters;
    if (by_region.size() >= cfg().cluster_min_regions)
      clusters = genesis::find_cross_region_questions(by_region, cfg().cluster_min_regions, cfg().cluster_threshold,
                                                      embedder());
    std::vector<std::string> ids;
    std::vector<json> cluster_rows;
    for (const auto& c : clusters) {
      ids.push_back(c.cluster_id);
      json members = json::array();
      for (const auto& m : c.members) members.push_back({{"region", m.region}, {"qa_id", m.qa_id}, {"question", m.question}});
      cluster_rows.push_back({{"cluster_id", c.cluster_id}, {"regions", c.regions}, {"members", members}});
    }
    auto [train, heldout] = genesis::holdout_split(pairs, clusters, ids);
    write_jsonl(file("clusters.jsonl"), cluster_rows);
    write_pairs(file("heldout.jsonl"), heldout);
    auto out = open_out(file("finetune.jsonl"));
    auto rejects = open_out(file("finetune_rejects.jsonl"));
    const auto summary = genesis::export_finetune_dataset(train, out, rejects);
    spdlog::info("fine-tune export: {} records, {} rejected, {} held out", summary.exported, summary.rejected,
                 heldout.size());
  }

  void report() {
    const auto bundle = build_report_bundle(owner.run_dir());
    write_report_bundle(bundle, file("report"));
  }
};

Pipeline::Pipeline(PipelineConfig config, PipelineOptions options)
    : config_(std::move(config)), options_(std::move(options)) {
  fs::create_directories(config_.output_dir / "logs");
  ledger_ = std::make_shared<llm::CallLedger>((config_.output_dir / "logs" / "calls.jsonl").string());
  impl_ = std::make_unique<Impl>(*this);
}

Pipeline::~Pipeline() = default;

StageResult Pipeline::run(std::string_view stage_name) {
  const std::string stage(stage_name);
  const auto def_it = stage_defs().find(stage);
  if (def_it == stage_defs().end()) throw ArgumentError("unknown stage '" + stage + "'");
  const auto& def = def_it->second;
  const auto& dir = run_dir();

  for (const auto& f : def.requires_files)
    if (!fs::is_regular_file(dir / f))
      throw DependencyError("'" + stage + "' needs " + f + "; run '" + producers().at(f) + "' first");

  const json cj = to_json(config_);
  json relevant = json::object();
  std::map<std::string, std::string> inputs;
  auto digest_external = [&](const fs::path& p) { inputs["ext:" + p.string()] = file_digest(p); };
  if (stage == "ingest") {
    relevant = {{"corpus_manifest", cj["corpus_manifest"]}};
    digest_external(config_.corpus_manifest);
    for (const auto& e : corpus::load_manifest(config_.corpus_manifest.string()).entries) digest_external(e.path);
  } else if (stage == "chunk") {
    relevant = cj["chunking"];
  } else if (stage == "index" || stage == "recall") {
    relevant = {{"embedder", cj["embedder"]}, {"seed", config_.seed}, {"retrieval", cj["retrieval"]}};
  } else if (stage == "ablate") {
    relevant = {{"embedder", cj["embedder"]}, {"seed", config_.seed}, {"retrieval", cj["retrieval"]}};
  } else if (stage == "tag" || stage == "genq" || stage == "gena") {
    relevant = {{"generation", cj["generation"]}, {"embedder", cj["embedder"]}, {"k", config_.k}, {"seed", config_.seed}};
    if (!config_.templates_dir.empty() && fs::is_directory(config_.templates_dir))
      for (const auto& e : fs::directory_iterator(config_.templates_dir))
        if (e.path().extension() == ".tmpl") digest_external(e.path());
    if (!config_.examples_file.empty()) digest_external(config_.examples_file);
  } else if (stage == "metrics") {
    relevant = {{"metrics", cj["metrics"]}, {"seed", config_.seed}};
    if (config_.word_vectors.kind == "file") digest_external(config_.word_vectors.path);
  } else if (stage == "judge") {
    relevant = {{"judge", cj["judge"]}, {"generation", cj["generation"]}, {"embedder", cj["embedder"]},
                {"k", config_.k}, {"seed", config_.seed}};
    if (!config_.templates_dir.empty() && fs::is_directory(config_.templates_dir))
      for (const auto& e : fs::directory_iterator(config_.templates_dir))
        if (e.path().extension() == ".tmpl") digest_external(e.path());
  } else if (stage == "export-ft") {
    relevant = {{"cross_region", cj["cross_region"]}, {"finetune", cj["finetune"]}, {"embedder", cj["embedder"]},
                {"seed", config_.seed}};
  }
  inputs["config"] = sha256_hex(relevant.dump());
  for (const auto& f : def.requires_files) inputs[f] = file_digest(dir / f);
  for (const auto& f : def.optional_files) inputs[f] = file_digest(dir / f);

  const fs::path marker = dir / "stages" / (stage + ".json");
  StageResult result{stage, StageStatus::Ran, def.outputs};
  if (!options_.force && fs::is_regular_file(marker)) {
    try {
      const auto prev = artifact_from_json(json::parse(slurp(marker)));
      const bool outputs_present = std::all_of(def.outputs.begin(), def.outputs.end(),
                                               [&](const std::string& o) { return fs::is_regular_file(dir / o); });
      if (prev.complete && prev.input_digests == inputs && outputs_present) {
        result.status = StageStatus::Skipped;
        impl_->log({{"stage", stage}, {"status", "skipped"}});
        return result;
      }
    } catch (const std::exception& e) {
      spdlog::warn("ignoring unreadable marker {}: {}", marker.string(), e.what());
    }
  }

  fs::remove(marker);
  const auto calls_before = ledger_->calls();
  const auto t0 = std::chrono::steady_clock::now();
  impl_->log({{"stage", stage}, {"status", "started"}});
  if (stage == "ingest") impl_->ingest();
  else if (stage == "chunk") impl_->chunk();
  else if (stage == "index") impl_->build_index();
  else if (stage == "tag") impl_->tag();
  else if (stage == "genq") impl_->genq();
  else if (stage == "gena") impl_->gena();
  else if (stage == "metrics") impl_->metrics();
  else if (stage == "judge") impl_->judge();
  else if (stage == "recall") impl_->recall();
  else if (stage == "ablate") impl_->ablate();
  else if (stage == "export-ft") impl_->export_ft();
  else if (stage == "report") impl_->report();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  StageArtifact art{stage, inputs, def.outputs, true};
  open_out(marker) << to_json(art).dump(2) << '\n';
  impl_->log({{"stage", stage}, {"status", "done"}, {"seconds", secs}, {"calls", ledger_->calls() - calls_before}});
  return result;
}

std::vector<StageResult> Pipeline::run_all() {
  std::vector<StageResult> out;
  for (const auto& s : stage_names()) out.push_back(run(s));
  return out;
}

}  // namespace qagen::pipeline
