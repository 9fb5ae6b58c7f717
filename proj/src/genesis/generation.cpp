#include "qagen/genesis/generation.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <istream>
#include <ostream>

#include "qagen/genesis/prompts.hpp"

namespace qagen::genesis {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

// Text after a list marker ("12." "12)" "-"), or nullopt for an unmarked line.
std::optional<std::string_view> strip_marker(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  if (i < line.size() && line[i] == '-') return line.substr(i + 1);
  const std::size_t digits = i;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i == digits || i >= line.size()) return std::nullopt;
  if (line[i] == '.' || line[i] == ')') return line.substr(i + 1);
  return std::nullopt;
}

std::string section_text(const corpus::Section& s) { return corpus::flatten_section(s); }

std::string qa_id_for(const SectionInput& in, char kind, std::size_t ordinal) {
  return in.doc_id + ":s" + corpus::path_to_string(in.section.path) + ":" + kind + std::to_string(ordinal);
}

llm::CompletionRequest request_for(const llm::RenderedPrompt& prompt, std::string_view purpose,
                                   std::string_view item) {
  llm::CompletionRequest req;
  req.messages = prompt.messages;
  req.max_tokens = prompt.max_tokens.value_or(2000);
  req.temperature = llm::kGenerationTemperature;
  req.purpose = std::string(purpose);
  req.item = std::string(item);
  return req;
}

void require_content(const SectionInput& section) {
  if (trim(section_text(section.section)).empty())
    throw ArgumentError("section " + section.doc_id + ":" + corpus::path_to_string(section.section.path) +
                        " has no content");
}

QAPair base_pair(const SectionInput& section, const ContextMode& mode, Generation generation,
                 const llm::LlmClient& client) {
  QAPair p;
  p.doc_id = section.doc_id;
  p.section_path = section.section.path;
  p.region = section.region;
  p.provenance_chunk_ids = section.chunk_ids;
  p.context_mode = mode_name(mode);
  p.generation = generation;
  p.model_label = client.default_model();
  return p;
}

}  // namespace

std::vector<SectionInput> section_inputs(const corpus::DocumentRecord& doc, std::span<const corpus::Chunk> chunks) {
  std::vector<SectionInput> out;
  std::string region;
  if (auto it = doc.metadata.find("region"); it != doc.metadata.end()) region = it->second;
  for (const auto& section : doc.sections) {
    SectionInput in;
    in.doc_id = doc.doc_id;
    in.source = doc.source;
    in.title = doc.title;
    in.region = region;
    in.section = section;
    for (const auto& c : chunks)
      if (c.doc_id == doc.doc_id && c.section_path == section.path) in.chunk_ids.push_back(c.chunk_id);
    out.push_back(std::move(in));
  }
  return out;
}

std::string_view generation_name(Generation g) {
  return g == Generation::Combined ? "combined" : "separate_question_then_rag";
}

Generation parse_generation(std::string_view name) {
  if (name == "combined") return Generation::Combined;
  if (name == "separate_question_then_rag") return Generation::SeparateQuestionThenRAG;
  throw ArgumentError("unknown generation kind: " + std::string(name));
}

json to_json(const QAPair& p) {
  return {{"qa_id", p.qa_id},
          {"question", p.question},
          {"answer", p.answer ? json(*p.answer) : json(nullptr)},
          {"doc_id", p.doc_id},
          {"section_path", p.section_path},
          {"region", p.region},
          {"provenance_chunk_ids", p.provenance_chunk_ids},
          {"retrieved_chunk_ids", p.retrieved_chunk_ids},
          {"context_mode", p.context_mode},
          {"generation", generation_name(p.generation)},
          {"model_label", p.model_label}};
}

QAPair qa_pair_from_json(const json& j) {
  QAPair p;
  try {
    p.qa_id = j.at("qa_id").get<std::string>();
    p.question = j.at("question").get<std::string>();
    if (const auto& a = j.at("answer"); !a.is_null()) p.answer = a.get<std::string>();
    p.doc_id = j.at("doc_id").get<std::string>();
    p.section_path = j.at("section_path").get<corpus::SectionPath>();
    p.region = j.value("region", std::string{});
    p.provenance_chunk_ids = j.at("provenance_chunk_ids").get<std::vector<std::string>>();
    p.retrieved_chunk_ids = j.value("retrieved_chunk_ids", std::vector<std::string>{});
    p.context_mode = j.at("context_mode").get<std::string>();
    p.generation = parse_generation(j.at("generation").get<std::string>());
    p.model_label = j.value("model_label", std::string{});
  } catch (const json::exception& e) {
    throw SchemaError("qa_pair", e.what());
  }
  if (trim(p.question).empty()) throw SchemaError("question", "QAPair " + p.qa_id + " has an empty question");
  if (p.generation == Generation::SeparateQuestionThenRAG && p.answer && p.retrieved_chunk_ids.empty())
    throw SchemaError("retrieved_chunk_ids", "RAG answer " + p.qa_id + " has no retrieved chunks");
  return p;
}

void write_qa_jsonl(std::ostream& out, std::span<const QAPair> pairs) {
  for (const auto& p : pairs) out << to_json(p).dump() << '\n';
}

std::vector<QAPair> read_qa_jsonl(std::istream& in) {
  std::vector<QAPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(qa_pair_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ParseError("QAPair JSONL line " + std::to_string(lineno) + ": " + e.what(), e.byte, line);
    }
  }
  return out;
}

std::vector<std::string> parse_question_list(std::string_view completion) {
  std::vector<std::string> out;
  for (auto line : lines_of(completion)) {
    auto body = strip_marker(line);
    if (!body) continue;
    std::string q = trim(*body);
    if (!q.empty()) out.push_back(std::move(q));
  }
  return out;
}

llm::RenderedPrompt render_question_prompt(const llm::PromptTemplate& tmpl, const QuestionPromptInputs& in) {
  if (!in.section || !in.mode) throw ArgumentError("render_question_prompt needs a section and a mode");
  const std::vector<std::string> examples(in.examples.begin(), in.examples.end());
  return tmpl.render({{"context", context_slot(*in.mode)},
                      {"examples", examples_slot(examples)},
                      {"source", in.section->source},
                      {"title", in.section->title},
                      {"section", section_text(in.section->section)}});
}

std::vector<QAPair> generate_questions(const SectionInput& section, const ContextMode& mode, llm::LlmClient& client,
                                       std::span<const std::string> examples, const llm::TemplateSet& templates) {
  require_content(section);
  const auto prompt = render_question_prompt(templates.get("question"), {&section, &mode, examples});
  const std::string raw = client.complete(request_for(prompt, "genq", section_key(section)));
  auto questions = parse_question_list(raw);
  const std::string where = section.doc_id + ":" + corpus::path_to_string(section.section.path);
  if (questions.empty()) throw GenerationError("no questions parsed for section " + where, raw);
  if (questions.size() > kMaxQuestions) {
    spdlog::warn("section {}: {} questions parsed, keeping the first {}", where, questions.size(), kMaxQuestions);
    questions.resize(kMaxQuestions);
  }
  if (questions.size() < kWarnBelowQuestions)
    spdlog::warn("section {}: only {} questions generated", where, questions.size());

  std::vector<QAPair> out;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    auto p = base_pair(section, mode, Generation::SeparateQuestionThenRAG, client);
    p.qa_id = qa_id_for(section, 'q', i);
    p.question = std::move(questions[i]);
    out.push_back(std::move(p));
  }
  return out;
}

RagAnswer generate_answer_rag(std::string_view question, const index::VectorIndex& index, const ChunkTexts& chunks,
                              llm::Embedder& embedder, llm::LlmClient& client, const llm::TemplateSet& templates,
                              std::size_t k, std::string_view purpose, std::string_view item) {
  if (index.empty()) throw ArgumentError("generate_answer_rag needs a non-empty index");
  if (k == 0) throw ArgumentError("generate_answer_rag needs k >= 1");
  if (trim(question).empty()) throw ArgumentError("generate_answer_rag needs a question");

  RagAnswer out;
  out.hits = index.search(index::embed(question, embedder), k);
  std::string snippets;
  for (std::size_t i = 0; i < out.hits.size(); ++i) {
    auto it = chunks.find(out.hits[i].chunk_id);
    if (it == chunks.end()) throw ArgumentError("retrieved chunk has no stored text: " + out.hits[i].chunk_id);
    if (i) snippets += "\n\n";
    snippets += "[" + std::to_string(i + 1) + "] " + it->second;
  }
  const auto prompt = templates.get("answer_rag").render({{"snippets", snippets}, {"question", std::string(question)}});
  out.answer = client.complete(request_for(prompt, purpose, item));
  return out;
}

void answer_pair(QAPair& pair, const index::VectorIndex& index, const ChunkTexts& chunks, llm::Embedder& embedder,
                 llm::LlmClient& client, const llm::TemplateSet& templates, std::size_t k) {
  auto rag = generate_answer_rag(pair.question, index, chunks, embedder, client, templates, k, "gena", pair.qa_id);
  pair.answer = std::move(rag.answer);
  pair.retrieved_chunk_ids.clear();
  for (const auto& h : rag.hits) pair.retrieved_chunk_ids.push_back(h.chunk_id);
}

std::string generate_answer_direct(std::string_view question, llm::LlmClient& client,
                                   const llm::TemplateSet& templates, std::string_view purpose, std::string_view item) {
  if (trim(question).empty()) throw ArgumentError("generate_answer_direct needs a question");
  const auto prompt = templates.get("answer_direct").render({{"question", std::string(question)}});
  return client.complete(request_for(prompt, purpose, item));
}

std::string section_key(const SectionInput& section) {
  return section.doc_id + ":s" + corpus::path_to_string(section.section.path);
}

std::vector<std::pair<std::string, std::string>> parse_qa_pairs(std::string_view completion) {
  std::vector<std::pair<std::string, std::string>> out;
  std::optional<std::string> question;
  std::optional<std::string> answer;
  auto flush = [&] {
    if (question && answer && !trim(*question).empty() && !trim(*answer).empty())
      out.emplace_back(trim(*question), trim(*answer));
    question.reset();
    answer.reset();
  };
  for (auto line : lines_of(completion)) {
    std::string_view body = line;
    if (auto stripped = strip_marker(line)) body = *stripped;
    const std::string t = trim(body);
    auto starts = [&](std::string_view tag) {
      return t.size() >= tag.size() && (t.compare(0, tag.size(), tag) == 0);
    };
    if (starts("Q:") || starts("Question:")) {
      flush();
      question = t.substr(t.find(':') + 1);
    } else if ((starts("A:") || starts("Answer:")) && question && !answer) {
      answer = t.substr(t.find(':') + 1);
    } else if (!t.empty()) {
      if (answer) *answer += " " + t;
      else if (question) *question += " " + t;
    }
  }
  flush();
  return out;
}

std::vector<QAPair> generate_combined(const SectionInput& section, const ContextMode& mode, llm::LlmClient& client,
                                      std::span<const std::string> examples, const llm::TemplateSet& templates) {
  require_content(section);
  const auto prompt = render_question_prompt(templates.get("combined"), {&section, &mode, examples});
  const std::string raw = client.complete(request_for(prompt, "combined", section_key(section)));
  auto parsed = parse_qa_pairs(raw);
  const std::string where = section.doc_id + ":" + corpus::path_to_string(section.section.path);
  if (parsed.empty()) throw GenerationError("no question/answer pairs parsed for section " + where, raw);
  if (parsed.size() > kMaxQuestions) {
    spdlog::warn("section {}: {} pairs parsed, keeping the first {}", where, parsed.size(), kMaxQuestions);
    parsed.resize(kMaxQuestions);
  }
  if (parsed.size() < kWarnBelowQuestions) spdlog::warn("section {}: only {} pairs generated", where, parsed.size());

  std::vector<QAPair> out;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    auto p = base_pair(section, mode, Generation::Combined, client);
    p.qa_id = qa_id_for(section, 'p', i);
    p.question = std::move(parsed[i].first);
    p.answer = std::move(parsed[i].second);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace qagen::genesis
