#include "qagen/judge/judges.hpp"

namespace qagen::judge {

namespace {

#define QAGEN_SCORE_FORMAT                                                                         \
  "Reply with exactly two lines: \"Score: <value>\" and then \"Explanation: <one or two sentences>\"."

constexpr const char* kRelevance = R"({{#system~}}
You review questions written for farmers and agricultural advisers.
{{~/system}}

{{#user~}}
Rate the question on a scale of 1 to 5, with 5 being a question that would be asked by a farmer and 1 a question that would not, given the context.

Context:
{{context}}

Question: {{question}}

)" QAGEN_SCORE_FORMAT R"( The value is an integer from 1 to 5.
{{~/user}}
)";

constexpr const char* kGlobalRelevance = R"({{#system~}}
You review questions written for farmers and agricultural advisers.
{{~/system}}

{{#user~}}
Without any additional context, rate the question on a scale of 1 to 5, with 5 being a question that would be asked by a farmer and 1 a question that would not.

Question: {{question}}

)" QAGEN_SCORE_FORMAT R"( The value is an integer from 1 to 5.
{{~/user}}
)";

constexpr const char* kCoverage = R"({{#system~}}
Your task is to rate from 1 to 5 if the answer can be extracted from the context and the question.
{{~/system}}

{{#user~}}
Context:
{{context}}

Question: {{question}}

Answer: {{answer}}

)" QAGEN_SCORE_FORMAT R"( The value is an integer from 1 to 5, where 5 means the answer is fully contained in the context.
{{~/user}}
)";

constexpr const char* kFluency = R"({{#system~}}
You assess the writing quality of questions.
{{~/system}}

{{#user~}}
Rate the fluency of the question below on a scale of 1 to 5 and provide an explanation. A 5 reads naturally, is grammatical and is understandable on its own; a 1 is garbled or impossible to follow.

Question: {{question}}

)" QAGEN_SCORE_FORMAT R"(
{{~/user}}
)";

constexpr const char* kCoherence = R"({{#system~}}
You compare a predicted answer with a ground-truth answer.
{{~/system}}

{{#user~}}
Rate the coherence of the predicted answer from 1 to 5, where 1 means it lacks coherence and 5 means it is perfectly coherent. Judge it against the ground truth and the context.

Context:
{{context}}

Question: {{question}}

Ground truth: {{ground_truth}}

Predicted answer: {{answer}}

)" QAGEN_SCORE_FORMAT R"(
{{~/user}}
)";

constexpr const char* kAnswerRelevance = R"({{#system~}}
You compare a predicted answer with a ground-truth answer.
{{~/system}}

{{#user~}}
Rate from 1 to 5 how well the predicted answer addresses the main aspects of the question given the context, where 5 means perfect relevance.

Context:
{{context}}

Question: {{question}}

Ground truth: {{ground_truth}}

Predicted answer: {{answer}}

)" QAGEN_SCORE_FORMAT R"(
{{~/user}}
)";

constexpr const char* kGroundedness = R"({{#system~}}
You check whether answers are supported by a context.
{{~/system}}

{{#user~}}
Rate from 1 to 5 whether the predicted answer follows logically from the information in the context, where 5 means every claim is supported and 1 means it is not supported at all.

Context:
{{context}}

Question: {{question}}

Ground truth: {{ground_truth}}

Predicted answer: {{answer}}

)" QAGEN_SCORE_FORMAT R"(
{{~/user}}
)";

constexpr const char* kMakeGuideline = R"({{#system~}}
You write grading guidelines for short-answer questions.
{{~/system}}

{{#user~}}
List what a correct answer to the question must contain, based on the reference answer. Reply with one line that starts with "Evaluation_guideline: The answer should mention".

Question: {{question}}

Answer: {{reference_answer}}
{{~/user}}
)";

constexpr const char* kGuideline = R"({{#system~}}
You grade answers against an evaluation guideline.
{{~/system}}

{{#user~}}
Score the answer from 0 to 1 according to how completely it fulfils the criteria of the evaluation guideline. 1 means every criterion is met and 0 means none is.

Question: {{question}}

Evaluation_guideline: {{guideline}}

Answer: {{answer}}

)" QAGEN_SCORE_FORMAT R"( The value is a number between 0 and 1.
{{~/user}}
)";

constexpr const char* kSuccinctness = R"({{#system~}}
You grade answers for succinctness using the scoring sheet below.

Scoring sheet:
5 - on point; only the information the question asks for.
4 - mostly on point with a little extra detail.
3 - correct core answer surrounded by noticeable extra material.
2 - verbose; the core answer is buried in background or side topics.
1 - rambling; the answer is hard to find or missing.
{{~/system}}

{{#user~}}
Ground truth answer: {{reference_answer}}

Answer to grade: {{answer}}

Grade the answer on a scale from 1 to 5. )" QAGEN_SCORE_FORMAT R"(
{{~/user}}
)";

constexpr const char* kCorrectness = R"({{#system~}}
You grade answers for correctness using the scoring sheet below.

Scoring sheet:
correct - contains every key point of the ground truth and nothing that contradicts it.
partially correct - contains some key points of the ground truth but misses others.
incorrect - misses the key points or contradicts the ground truth.
{{~/system}}

{{#user~}}
Ground truth answer: {{reference_answer}}

Answer to grade: {{answer}}

Give a grade of correct, incorrect or partially correct. )" QAGEN_SCORE_FORMAT R"( The value is one of: correct, partially correct, incorrect.
{{~/user}}
)";

#undef QAGEN_SCORE_FORMAT

}  // namespace

llm::TemplateSet default_judge_templates() {
  llm::TemplateSet set;
  set.add("relevance", kRelevance);
  set.add("global_relevance", kGlobalRelevance);
  set.add("coverage", kCoverage);
  set.add("fluency", kFluency);
  set.add("coherence", kCoherence);
  set.add("answer_relevance", kAnswerRelevance);
  set.add("groundedness", kGroundedness);
  set.add("make_guideline", kMakeGuideline);
  set.add("guideline", kGuideline);
  set.add("succinctness", kSuccinctness);
  set.add("correctness", kCorrectness);
  return set;
}

}  // namespace qagen::judge
