#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qagen/error.hpp"
#include "qagen/judge/verdict.hpp"

namespace qagen::judge {

inline constexpr std::size_t kJudgeTrials = 5;

class EvaluationError : public Error {
 public:
  using Error::Error;
};

struct VarianceReport {
  std::string metric_name;
  std::string item_id;
  std::vector<JudgeVerdict> trials;
  std::size_t parsed = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population, over parse_ok trials
  std::optional<Grade> majority;
};

// Runs op(0) .. op(trials-1) in order. Throws EvaluationError when no trial parses.
VarianceReport judge_with_variance(const std::function<JudgeVerdict(int)>& op, const std::string& item_id,
                                   std::size_t trials = kJudgeTrials);

// Summary of an existing set of trial verdicts for one item.
VarianceReport summarize_trials(std::vector<JudgeVerdict> trials, const std::string& item_id);

// Most frequent grade; ties go to the worse grade. nullopt for no grades.
std::optional<Grade> majority_grade(const std::vector<Grade>& grades);

double mean_of(const std::vector<double>& xs);
double population_stddev(const std::vector<double>& xs);

nlohmann::json to_json(const VarianceReport& r);

}  // namespace qagen::judge
