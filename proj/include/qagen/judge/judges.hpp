#pragma once

#include <string>
#include <string_view>

#include "qagen/error.hpp"
#include "qagen/judge/verdict.hpp"
#include "qagen/llm/client.hpp"
#include "qagen/llm/prompt_template.hpp"

namespace qagen::judge {

struct JudgePrompt {
  std::string metric_name;
  std::string template_id;
  std::string rendered;  // messages joined as "<role>: <content>" blocks
  Scale scale;
  llm::RenderedPrompt prompt;
};

// Built-in judge templates keyed by metric template id, plus "make_guideline".
llm::TemplateSet default_judge_templates();

// Pure rendering of `metric`'s template with `slots`.
JudgePrompt render_judge_prompt(std::string_view metric, const llm::SlotValues& slots,
                                const llm::TemplateSet& templates);

// Where judge calls go. An empty model label uses the client's default.
struct JudgeEnv {
  llm::LlmClient* client = nullptr;
  const llm::TemplateSet* templates = nullptr;
  std::string model_label;
};

inline constexpr const char* kQuestionJudgeModel = "gpt-3.5-turbo";
inline constexpr const char* kEvalJudgeModel = "gpt-4";

// One judge call; unparseable or out-of-scale replies give parse_ok=false.
JudgeVerdict run_judge(std::string_view metric, const llm::SlotValues& slots, const JudgeEnv& env, int trial = 0);

JudgeVerdict rate_question_relevance(std::string_view question, std::string_view context, const JudgeEnv& env,
                                     int trial = 0);
JudgeVerdict rate_question_global_relevance(std::string_view question, const JudgeEnv& env, int trial = 0);
JudgeVerdict rate_coverage(std::string_view question, std::string_view answer, std::string_view context,
                           const JudgeEnv& env, int trial = 0);
JudgeVerdict rate_fluency(std::string_view question, const JudgeEnv& env, int trial = 0);

enum class AnswerMetric { Coherence, Relevance, Groundedness };
std::string_view answer_metric_name(AnswerMetric m);
JudgeVerdict rate_answer(AnswerMetric metric, std::string_view question, std::string_view answer,
                         std::string_view context, std::string_view ground_truth, const JudgeEnv& env, int trial = 0);

struct EvalGuideline {
  std::string question;
  std::string reference_answer;
  std::string guideline_text;

  bool operator==(const EvalGuideline&) const = default;
};

nlohmann::json to_json(const EvalGuideline& g);
EvalGuideline guideline_from_json(const nlohmann::json& j);

// Throws ArgumentError for an empty reference and ParseError for an empty reply.
EvalGuideline make_guideline(std::string_view question, std::string_view reference_answer, const JudgeEnv& env);
JudgeVerdict score_with_guideline(std::string_view answer, const EvalGuideline& guideline, const JudgeEnv& env,
                                  int trial = 0);
JudgeVerdict rate_succinctness(std::string_view answer, std::string_view reference_answer, const JudgeEnv& env,
                               int trial = 0);
JudgeVerdict rate_correctness(std::string_view answer, std::string_view reference_answer, const JudgeEnv& env,
                              int trial = 0);

}  // namespace qagen::judge
