#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace qagen::judge {

enum class Scale { OneToFive, ZeroToOne, ThreeWay };
enum class Grade { Incorrect = 0, PartiallyCorrect = 1, Correct = 2 };

std::string_view scale_name(Scale s);
Scale parse_scale(std::string_view name);
std::string_view grade_name(Grade g);  // "correct", "partially_correct", "incorrect"
std::optional<Grade> parse_grade(std::string_view text);
double grade_value(Grade g);  // 1, 0.5, 0

enum class MetricTier { Question, Answer, ModelEval };

struct MetricSpec {
  std::string name;
  Scale scale;
  std::string template_id;
  MetricTier tier;
};

// relevance, global_relevance, coverage, fluency, coherence,
// answer_relevance, groundedness, guideline, succinctness, correctness.
const std::vector<MetricSpec>& metric_registry();
const MetricSpec& metric_spec(std::string_view name);  // throws ArgumentError

struct JudgeVerdict {
  std::string metric_name;
  double score = 0.0;           // meaningful only when parse_ok
  std::optional<Grade> grade;   // ThreeWay only
  std::string explanation;
  std::string raw_response;
  bool parse_ok = false;
  int trial_index = 0;
  // What was judged, for aggregation.
  std::string item_id;
  std::string subject;  // model whose output was judged
  bool fine_tuned = false;
  bool rag = false;

  bool operator==(const JudgeVerdict&) const = default;
};

nlohmann::json to_json(const JudgeVerdict& v);
JudgeVerdict verdict_from_json(const nlohmann::json& j);

struct ParsedScore {
  bool ok = false;
  double score = 0.0;
  std::optional<Grade> grade;
  std::string explanation;
};

// Accepts "Score: <v>" on any line, a leading bare value, or a JSON object
// {"score", "explanation"}. Values outside `scale` are rejected, never clamped.
ParsedScore parse_score(std::string_view raw, Scale scale);

bool within_scale(double score, Scale scale);

}  // namespace qagen::judge
