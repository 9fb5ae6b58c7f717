#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qagen/corpus/chunker.hpp"
#include "qagen/corpus/document.hpp"
#include "qagen/error.hpp"
#include "qagen/genesis/context.hpp"
#include "qagen/index/vector_index.hpp"
#include "qagen/llm/client.hpp"
#include "qagen/llm/embedding.hpp"
#include "qagen/llm/prompt_template.hpp"

namespace qagen::genesis {

class GenerationError : public Error {
 public:
  GenerationError(const std::string& what, std::string raw) : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

inline constexpr std::size_t kMaxQuestions = 15;
inline constexpr std::size_t kWarnBelowQuestions = 5;
inline constexpr std::size_t kDefaultRagK = 3;

// One section as seen by the generators.
struct SectionInput {
  std::string doc_id;
  std::string source;
  std::string title;
  std::string region;
  corpus::Section section;
  std::vector<std::string> chunk_ids;  // chunks covering the section, in order
};

// Pairs each section of `doc` with the chunks cut from it.
std::vector<SectionInput> section_inputs(const corpus::DocumentRecord& doc, std::span<const corpus::Chunk> chunks);

enum class Generation { Combined, SeparateQuestionThenRAG };
std::string_view generation_name(Generation g);
Generation parse_generation(std::string_view name);

struct QAPair {
  std::string qa_id;
  std::string question;
  std::optional<std::string> answer;
  std::string doc_id;
  corpus::SectionPath section_path;
  std::string region;
  // Chunks of the section the question was generated from.
  std::vector<std::string> provenance_chunk_ids;
  // Chunks retrieved to answer it (separate generation only).
  std::vector<std::string> retrieved_chunk_ids;
  std::string context_mode;
  Generation generation = Generation::SeparateQuestionThenRAG;
  std::string model_label;

  bool operator==(const QAPair&) const = default;
};

nlohmann::json to_json(const QAPair& pair);
QAPair qa_pair_from_json(const nlohmann::json& j);
void write_qa_jsonl(std::ostream& out, std::span<const QAPair> pairs);
std::vector<QAPair> read_qa_jsonl(std::istream& in);

// Strips "1." / "1)" / "-" markers; unmarked lines are ignored.
std::vector<std::string> parse_question_list(std::string_view completion);

struct QuestionPromptInputs {
  const SectionInput* section = nullptr;
  const ContextMode* mode = nullptr;
  std::span<const std::string> examples;
};

// Pure rendering of a question-style template ("question" or "combined").
llm::RenderedPrompt render_question_prompt(const llm::PromptTemplate& tmpl, const QuestionPromptInputs& in);

// 1..15 questions; logs a warning below 5 and truncates above 15. Throws
// ArgumentError for an empty section, GenerationError for zero questions.
std::vector<QAPair> generate_questions(const SectionInput& section, const ContextMode& mode, llm::LlmClient& client,
                                       std::span<const std::string> examples, const llm::TemplateSet& templates);

struct RagAnswer {
  std::string answer;
  std::vector<index::RetrievalHit> hits;
};

using ChunkTexts = std::map<std::string, std::string, std::less<>>;

// Top-k chunks for the question are embedded in the "answer_rag" prompt.
RagAnswer generate_answer_rag(std::string_view question, const index::VectorIndex& index, const ChunkTexts& chunks,
                              llm::Embedder& embedder, llm::LlmClient& client, const llm::TemplateSet& templates,
                              std::size_t k = kDefaultRagK, std::string_view purpose = "gena",
                              std::string_view item = {});

// Answer without retrieval ("answer_direct" template).
std::string generate_answer_direct(std::string_view question, llm::LlmClient& client,
                                   const llm::TemplateSet& templates, std::string_view purpose = "answer",
                                   std::string_view item = {});

// "<doc_id>:s<path>", the ledger item of a section's generation calls.
std::string section_key(const SectionInput& section);

// Fills answer and retrieved_chunk_ids of a separately generated question.
void answer_pair(QAPair& pair, const index::VectorIndex& index, const ChunkTexts& chunks, llm::Embedder& embedder,
                 llm::LlmClient& client, const llm::TemplateSet& templates, std::size_t k = kDefaultRagK);

// "Q: ... / A: ..." pairs; answers may continue over several lines.
std::vector<std::pair<std::string, std::string>> parse_qa_pairs(std::string_view completion);

// One completion yielding question/answer pairs. Throws GenerationError
// (with the raw text) when no complete pair parses.
std::vector<QAPair> generate_combined(const SectionInput& section, const ContextMode& mode, llm::LlmClient& client,
                                      std::span<const std::string> examples, const llm::TemplateSet& templates);

}  // namespace qagen::genesis
