#include "qagen/genesis/prompts.hpp"

namespace qagen::genesis {

namespace {

constexpr const char* kTagTemplate = R"({{#user~}}
Text:
{{section}}

Answer the following questions with a single Yes or No:

1. The text mentions a specific location (City/State/Country), yes or no?

2. The text mentions a specific crop, yes or no?:

3. The text mentions a specific cattle, yes or no?:

4. The text mentions a specific disease, yes or no?:

Answer the following questions with a python list, or return an empty python list:

1. If the text mentioned a location or locations, list them:

2. If the text mentioned a crop or crops, list them:

3. If the text mentioned a cattle or cattles, list them:

4. If the text mentioned a disease or diseases, list them:
{{~/user}}

{{#assistant~}}
{{gen 'tags' max_tokens=500}}
{{~/assistant}}
)";

constexpr const char* kTagReformat =
    "That reply could not be read. Reply again with exactly eight numbered lines and nothing else: lines 1-4 hold "
    "only Yes or No, lines 5-8 hold one python list each, for example ['Washington'] or [].";

constexpr const char* kQuestionTemplate = R"({{#system~}}
You are an expert in agriculture and you are formulating questions from documents to assess the knowledge of a student about agriculture-related topics.

You have access to the following document metadata encoded as JSON: {{context}}
{{~/system}}

{{#user~}}
An example of expected output follows:

Examples:
{examples}

The document is from {{source}} and has title: {{title}}

Add location (state, country) and crop information to each question, if possible.

Please formulate as many questions as possible to assess knowledge of the text below.

{{section}}

{{~/user}}

{{#assistant~}}
{{gen 'answer' max_tokens=2000}}
{{~/assistant}}
)";

constexpr const char* kCombinedTemplate = R"({{#system~}}
You are an expert in agriculture and you are formulating questions from documents to assess the knowledge of a student about agriculture-related topics.

You have access to the following document metadata encoded as JSON: {{context}}
{{~/system}}

{{#user~}}
An example of expected output follows:

Examples:
{examples}

The document is from {{source}} and has title: {{title}}

Add location (state, country) and crop information to each question, if possible.

Please formulate as many questions as possible to assess knowledge of the text below, and answer each one from the text. Write every pair as a line starting with "Q:" followed by a line starting with "A:".

{{section}}

{{~/user}}

{{#assistant~}}
{{gen 'answer' max_tokens=2000}}
{{~/assistant}}
)";

constexpr const char* kAnswerRagTemplate = R"({{#system~}}
You are an expert in agriculture. Answer the question using the reference snippets provided. If the snippets do not contain the answer, say that the information is not available.
{{~/system}}

{{#user~}}
Reference snippets:
{{snippets}}

Question: {{question}}
{{~/user}}

{{#assistant~}}
{{gen 'answer' max_tokens=1000}}
{{~/assistant}}
)";

constexpr const char* kAnswerDirectTemplate = R"({{#system~}}
You are an expert in agriculture. Answer the question.
{{~/system}}

{{#user~}}
Question: {{question}}
{{~/user}}

{{#assistant~}}
{{gen 'answer' max_tokens=1000}}
{{~/assistant}}
)";

}  // namespace

llm::TemplateSet default_templates() {
  llm::TemplateSet set;
  set.add("tag", kTagTemplate);
  set.add("tag_reformat", kTagReformat);
  set.add("question", kQuestionTemplate);
  set.add("combined", kCombinedTemplate);
  set.add("answer_rag", kAnswerRagTemplate);
  set.add("answer_direct", kAnswerDirectTemplate);
  return set;
}

const std::vector<std::string>& default_examples() {
  static const std::vector<std::string> examples = {
      "What cover crops are recommended after winter wheat harvest in eastern Washington?",
      "How does no-till management affect soil moisture for dryland wheat in the Palouse region?",
      "Which practices reduce the risk of stripe rust in spring wheat grown in Idaho?",
  };
  return examples;
}

std::string examples_slot(const std::vector<std::string>& examples) {
  std::string out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (i) out.push_back('\n');
    out += std::to_string(i + 1) + ". " + examples[i];
  }
  return out;
}

}  // namespace qagen::genesis
