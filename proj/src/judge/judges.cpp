#include "qagen/judge/judges.hpp"

#include <cctype>

namespace qagen::judge {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

void require(std::string_view value, const char* what) {
  if (trim(value).empty()) throw ArgumentError(std::string(what) + " must be non-empty");
}

void check_env(const JudgeEnv& env) {
  if (!env.client || !env.templates) throw ArgumentError("judge environment needs a client and templates");
}

std::string complete(const JudgeEnv& env, const llm::RenderedPrompt& prompt, std::string purpose) {
  llm::CompletionRequest req;
  req.model_label = env.model_label;
  req.messages = prompt.messages;
  req.max_tokens = prompt.max_tokens.value_or(500);
  req.temperature = llm::kJudgeTemperature;
  req.purpose = std::move(purpose);
  return env.client->complete(std::move(req));
}

}  // namespace

JudgePrompt render_judge_prompt(std::string_view metric, const llm::SlotValues& slots,
                                const llm::TemplateSet& templates) {
  const auto& spec = metric_spec(metric);
  JudgePrompt out;
  out.metric_name = spec.name;
  out.template_id = spec.template_id;
  out.scale = spec.scale;
  out.prompt = templates.get(spec.template_id).render(slots);
  for (const auto& m : out.prompt.messages) {
    if (!out.rendered.empty()) out.rendered += "\n\n";
    out.rendered += std::string(llm::role_name(m.role)) + ": " + m.content;
  }
  return out;
}

JudgeVerdict run_judge(std::string_view metric, const llm::SlotValues& slots, const JudgeEnv& env, int trial) {
  check_env(env);
  const auto prompt = render_judge_prompt(metric, slots, *env.templates);
  JudgeVerdict v;
  v.metric_name = prompt.metric_name;
  v.trial_index = trial;
  v.raw_response = complete(env, prompt.prompt, "judge:" + prompt.metric_name);
  const auto parsed = parse_score(v.raw_response, prompt.scale);
  v.parse_ok = parsed.ok;
  if (parsed.ok) {
    v.score = parsed.score;
    v.grade = parsed.grade;
    v.explanation = parsed.explanation;
  }
  return v;
}

JudgeVerdict rate_question_relevance(std::string_view question, std::string_view context, const JudgeEnv& env,
                                     int trial) {
  require(question, "question");
  return run_judge("relevance", {{"question", std::string(question)}, {"context", std::string(context)}}, env, trial);
}

JudgeVerdict rate_question_global_relevance(std::string_view question, const JudgeEnv& env, int trial) {
  require(question, "question");
  return run_judge("global_relevance", {{"question", std::string(question)}}, env, trial);
}

JudgeVerdict rate_coverage(std::string_view question, std::string_view answer, std::string_view context,
                           const JudgeEnv& env, int trial) {
  require(question, "question");
  return run_judge("coverage",
                   {{"question", std::string(question)},
                    {"answer", std::string(answer)},
                    {"context", std::string(context)}},
                   env, trial);
}

JudgeVerdict rate_fluency(std::string_view question, const JudgeEnv& env, int trial) {
  require(question, "question");
  return run_judge("fluency", {{"question", std::string(question)}}, env, trial);
}

std::string_view answer_metric_name(AnswerMetric m) {
  switch (m) {
    case AnswerMetric::Coherence: return "coherence";
    case AnswerMetric::Relevance: return "answer_relevance";
    default: return "groundedness";
  }
}

JudgeVerdict rate_answer(AnswerMetric metric, std::string_view question, std::string_view answer,
                         std::string_view context, std::string_view ground_truth, const JudgeEnv& env, int trial) {
  require(question, "question");
  return run_judge(answer_metric_name(metric),
                   {{"question", std::string(question)},
                    {"answer", std::string(answer)},
                    {"context", std::string(context)},
                    {"ground_truth", std::string(ground_truth)}},
                   env, trial);
}

json to_json(const EvalGuideline& g) {
  return {{"question", g.question}, {"reference_answer", g.reference_answer}, {"guideline", g.guideline_text}};
}

EvalGuideline guideline_from_json(const json& j) {
  EvalGuideline g;
  try {
    g.question = j.at("question").get<std::string>();
    g.reference_answer = j.at("reference_answer").get<std::string>();
    g.guideline_text = j.at("guideline").get<std::string>();
  } catch (const json::exception& e) {
    throw SchemaError("guideline", e.what());
  }
  if (trim(g.guideline_text).empty()) throw SchemaError("guideline", "guideline text is empty");
  return g;
}

EvalGuideline make_guideline(std::string_view question, std::string_view reference_answer, const JudgeEnv& env) {
  check_env(env);
  require(question, "question");
  require(reference_answer, "reference answer");
  const auto prompt = env.templates->get("make_guideline")
                          .render({{"question", std::string(question)},
                                   {"reference_answer", std::string(reference_answer)}});
  const std::string raw = complete(env, prompt, "judge:make_guideline");
  std::string text = trim(raw);
  static constexpr std::string_view kLabel = "evaluation_guideline:";
  std::string lowered = text;
  for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (auto pos = lowered.find(kLabel); pos != std::string::npos) text = trim(text.substr(pos + kLabel.size()));
  if (text.empty()) throw ParseError("empty evaluation guideline", 0, raw);
  return {std::string(question), std::string(reference_answer), text};
}

JudgeVerdict score_with_guideline(std::string_view answer, const EvalGuideline& guideline, const JudgeEnv& env,
                                  int trial) {
  require(guideline.guideline_text, "guideline");
  return run_judge("guideline",
                   {{"question", guideline.question},
                    {"guideline", guideline.guideline_text},
                    {"answer", std::string(answer)}},
                   env, trial);
}

JudgeVerdict rate_succinctness(std::string_view answer, std::string_view reference_answer, const JudgeEnv& env,
                               int trial) {
  require(reference_answer, "reference answer");
  return run_judge("succinctness",
                   {{"answer", std::string(answer)}, {"reference_answer", std::string(reference_answer)}}, env, trial);
}

JudgeVerdict rate_correctness(std::string_view answer, std::string_view reference_answer, const JudgeEnv& env,
                              int trial) {
  require(reference_answer, "reference answer");
  return run_judge("correctness",
                   {{"answer", std::string(answer)}, {"reference_answer", std::string(reference_answer)}}, env, trial);
}

}  // namespace qagen::judge
