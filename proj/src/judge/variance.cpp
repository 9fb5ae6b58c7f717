#include "qagen/judge/variance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace qagen::judge {

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double population_stddev(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

std::optional<Grade> majority_grade(const std::vector<Grade>& grades) {
  if (grades.empty()) return std::nullopt;
  std::array<std::size_t, 3> counts{};
  for (Grade g : grades) ++counts[static_cast<std::size_t>(g)];
  // Scan from worst to best so ties keep the worse grade.
  std::size_t best = 0;
  for (std::size_t g = 1; g < counts.size(); ++g)
    if (counts[g] > counts[best]) best = g;
  return static_cast<Grade>(best);
}

VarianceReport summarize_trials(std::vector<JudgeVerdict> trials, const std::string& item_id) {
  VarianceReport r;
  r.item_id = item_id;
  if (!trials.empty()) r.metric_name = trials.front().metric_name;
  std::vector<double> scores;
  std::vector<Grade> grades;
  for (const auto& v : trials) {
    if (!v.parse_ok) continue;
    scores.push_back(v.score);
    if (v.grade) grades.push_back(*v.grade);
  }
  r.parsed = scores.size();
  r.mean = mean_of(scores);
  r.stddev = population_stddev(scores);
  r.majority = majority_grade(grades);
  r.trials = std::move(trials);
  return r;
}

VarianceReport judge_with_variance(const std::function<JudgeVerdict(int)>& op, const std::string& item_id,
                                   std::size_t trials) {
  if (trials == 0) throw ArgumentError("judge_with_variance needs at least one trial");
  std::vector<JudgeVerdict> verdicts;
  verdicts.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    auto v = op(static_cast<int>(t));
    v.trial_index = static_cast<int>(t);
    if (v.item_id.empty()) v.item_id = item_id;
    verdicts.push_back(std::move(v));
  }
  auto report = summarize_trials(std::move(verdicts), item_id);
  if (report.parsed == 0)
    throw EvaluationError("all " + std::to_string(trials) + " judge trials for " + item_id + " were unparseable");
  return report;
}

nlohmann::json to_json(const VarianceReport& r) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& v : r.trials) trials.push_back(to_json(v));
  return {{"metric", r.metric_name},
          {"item_id", r.item_id},
          {"parsed", r.parsed},
          {"mean", r.mean},
          {"stddev", r.stddev},
          {"majority", r.majority ? nlohmann::json(grade_name(*r.majority)) : nlohmann::json(nullptr)},
          {"trials", trials}};
}

}  // namespace qagen::judge
