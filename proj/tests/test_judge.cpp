#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "qagen/judge/judges.hpp"
#include "qagen/judge/report.hpp"
#include "qagen/judge/variance.hpp"
#include "qagen/llm/stub.hpp"

using namespace qagen;
using namespace qagen::judge;

namespace {

struct Env {
  std::shared_ptr<llm::ChatBackend> backend;
  llm::TemplateSet templates = default_judge_templates();
  llm::LlmClient client;
  JudgeEnv env;

  explicit Env(std::shared_ptr<llm::ChatBackend> b) : backend(b), client(b) {
    env.client = &client;
    env.templates = &templates;
    env.model_label = kQuestionJudgeModel;
  }
};

Env fixed(std::string reply) { return Env(llm::make_fixed_stub(std::move(reply))); }

JudgeVerdict verdict(std::string metric, std::string item, double score, int trial, bool rag = false,
                     std::string subject = "m", bool parse_ok = true) {
  JudgeVerdict v;
  v.metric_name = std::move(metric);
  v.item_id = std::move(item);
  v.score = score;
  v.trial_index = trial;
  v.rag = rag;
  v.subject = std::move(subject);
  v.parse_ok = parse_ok;
  if (metric_spec(v.metric_name).scale == Scale::ThreeWay)
    v.grade = score == 1.0 ? Grade::Correct : score == 0.5 ? Grade::PartiallyCorrect : Grade::Incorrect;
  return v;
}

}  // namespace

TEST_CASE("parse_score formats") {
  auto one = [](std::string_view raw) { return parse_score(raw, Scale::OneToFive); };
  auto p = one("Score: 3\nExplanation: x");
  CHECK(p.ok);
  CHECK(p.score == 3);
  CHECK(p.explanation == "x");
  CHECK(one("4").score == 4);
  CHECK(one("**Score:** 5").score == 5);
  CHECK(one("Score: 4/5").score == 4);
  CHECK(one("Score: 2 out of 5").score == 2);
  CHECK(one("Explanation: fine\nScore: 1").score == 1);
  CHECK(one(R"({"score": 2, "explanation": "e"})").explanation == "e");
  for (const char* bad : {"Score: 6", "Score: 0", "Score: 3.5", "Score: 4/10", "Score: -2", "Score: five", "",
                          "The question is good.", "Score: 3abc", R"({"score": 9})", "{broken json", "Score: inf"}) {
    CAPTURE(bad);
    CHECK_FALSE(one(bad).ok);
  }

  auto unit = [](std::string_view raw) { return parse_score(raw, Scale::ZeroToOne); };
  CHECK(unit("Score: 0.75").score == 0.75);
  CHECK(unit("Score: 0").ok);
  CHECK(unit("Score: 1/1").score == 1);
  CHECK_FALSE(unit("Score: 1.2").ok);
  CHECK_FALSE(unit("Score: 3").ok);

  auto three = [](std::string_view raw) { return parse_score(raw, Scale::ThreeWay); };
  CHECK(three("Grade: partially correct").grade == Grade::PartiallyCorrect);
  CHECK(three("correct. The answer names the pest.").grade == Grade::Correct);
  CHECK(three("Correctness: incorrect").grade == Grade::Incorrect);
  CHECK(three("Score: partially_correct").score == 0.5);
  CHECK_FALSE(three("Score: 1").ok);
  CHECK_FALSE(three("The answer is fine").ok);
}

TEST_CASE("within_scale") {
  CHECK(within_scale(1, Scale::OneToFive));
  CHECK_FALSE(within_scale(2.5, Scale::OneToFive));
  CHECK(within_scale(0.3, Scale::ZeroToOne));
  CHECK_FALSE(within_scale(NAN, Scale::ZeroToOne));
  CHECK(within_scale(0.5, Scale::ThreeWay));
  CHECK_FALSE(within_scale(0.7, Scale::ThreeWay));
}

TEST_CASE("fuzzed replies never clamp") {
  std::mt19937_64 rng(2024);
  const std::vector<std::string> labels{"Score: ", "score:", "**Score:** ", "", "Grade: ", "Rating: "};
  const std::vector<std::string> tails{"", "\nExplanation: because", "/5", " out of 5", "/10", "abc", "%"};
  for (int i = 0; i < 500; ++i) {
    std::uniform_real_distribution<double> u(-3.0, 9.0);
    double value = u(rng);
    if (rng() % 2) value = std::round(value);
    char num[32];
    std::snprintf(num, sizeof num, rng() % 3 ? "%g" : "%.2f", value);
    const std::string raw = labels[rng() % labels.size()] + num + tails[rng() % tails.size()];
    for (Scale s : {Scale::OneToFive, Scale::ZeroToOne, Scale::ThreeWay}) {
      const auto p = parse_score(raw, s);
      CAPTURE(raw);
      if (!p.ok) continue;
      CHECK(within_scale(p.score, s));
      // A parsed number is the number in the text, never a bound substituted for it.
      if (s != Scale::ThreeWay) CHECK(std::abs(p.score - std::strtod(num, nullptr)) < 1e-12);
    }
  }
}

TEST_CASE("templates cover every metric") {
  const auto t = default_judge_templates();
  for (const auto& m : metric_registry()) CHECK(t.contains(m.template_id));
  CHECK(t.contains("make_guideline"));
  const auto p = render_judge_prompt("relevance", {{"question", "Q?"}, {"context", "CTX"}}, t);
  CHECK(p.scale == Scale::OneToFive);
  CHECK(p.rendered.find("Q?") != std::string::npos);
  CHECK(p.rendered.find("CTX") != std::string::npos);
  CHECK_THROWS_AS(render_judge_prompt("relevance", {{"question", "Q?"}}, t), ArgumentError);
  CHECK_THROWS_AS(metric_spec("vibes"), ArgumentError);
}

TEST_CASE("question-tier judges") {
  SUBCASE("relevance 5 and 1") {
    auto a = fixed("Score: 5\nExplanation: The question is answered directly by the passage about soil practices.");
    CHECK(rate_question_relevance("How do practices help soil?", "passage", a.env).score == 5);
    auto b = fixed("Score: 1\nExplanation: The passage has nothing on that topic.");
    CHECK(rate_question_relevance("What about insects?", "passage", b.env).score == 1);
  }
  SUBCASE("stub parse fixture") {
    auto e = fixed("Score: 3\nExplanation: x");
    const auto v = rate_question_relevance("Q?", "C", e.env, 2);
    CHECK(v.parse_ok);
    CHECK(v.score == 3);
    CHECK(v.explanation == "x");
    CHECK(v.trial_index == 2);
    CHECK(v.metric_name == "relevance");
    CHECK(e.client.ledger().entries()[0].purpose == "judge:relevance");
  }
  SUBCASE("global relevance and malformed replies") {
    auto a = fixed("Score: 5\nExplanation: broadly useful to growers.");
    CHECK(rate_question_global_relevance("How can rotations change?", a.env).score == 5);
    auto b = fixed("Score: 1\nExplanation: too narrow.");
    CHECK(rate_question_global_relevance("Which gene?", b.env).score == 1);
    auto bad = fixed("I would rate this highly");
    const auto v = rate_question_global_relevance("Q?", bad.env);
    CHECK_FALSE(v.parse_ok);
    CHECK(v.raw_response == "I would rate this highly");
  }
  SUBCASE("coverage") {
    auto a = fixed("Score: 5\nExplanation: the passage covers it.");
    CHECK(rate_coverage("Q?", "A", "C", a.env).score == 5);
    auto b = fixed("Score: 1\nExplanation: not addressed.");
    CHECK(rate_coverage("Q?", "A", "C", b.env).score == 1);
  }
  SUBCASE("fluency is deterministic with a stub") {
    auto a = fixed("Score: 5\nExplanation: clear.");
    CHECK(rate_fluency("How does erosion work?", a.env) == rate_fluency("How does erosion work?", a.env));
    auto b = fixed("Score: 3\nExplanation: missing context.");
    CHECK(rate_fluency("What does that test show?", b.env).score == 3);
  }
  auto e = fixed("Score: 3");
  CHECK_THROWS_AS(rate_fluency("  ", e.env), ArgumentError);
  CHECK_THROWS_AS(rate_fluency("Q?", JudgeEnv{}), ArgumentError);
}

TEST_CASE("answer-tier judges") {
  Env e(llm::make_cycling_stub({"Score: 5\nExplanation: consistent.", "Score: 1\nExplanation: contradicts."}));
  CHECK(rate_answer(AnswerMetric::Coherence, "Q?", "A", "C", "G", e.env).score == 5);
  CHECK(rate_answer(AnswerMetric::Coherence, "Q?", "A", "C", "G", e.env).score == 1);
  auto r = fixed("Score: 1\nExplanation: answers a different question.");
  const auto rel = rate_answer(AnswerMetric::Relevance, "Q?", "A", "C", "G", r.env);
  CHECK(rel.metric_name == "answer_relevance");
  CHECK(rel.score == 1);
  auto g = fixed("Score: 1\nExplanation: unsupported.");
  CHECK(rate_answer(AnswerMetric::Groundedness, "Q?", "A", "C", "G", g.env).metric_name == "groundedness");
}

TEST_CASE("guidelines") {
  auto e = fixed("Evaluation_guideline: The answer should mention one prolonged generation per year.");
  const auto g = make_guideline("How many generations?", "One long generation each year.", e.env);
  CHECK(g.guideline_text.find("one prolonged generation per year") != std::string::npos);
  CHECK(g.guideline_text.rfind("The answer", 0) == 0);
  CHECK(guideline_from_json(to_json(g)) == g);
  CHECK_THROWS_AS(make_guideline("Q?", "", e.env), ArgumentError);
  auto blank = fixed("Evaluation_guideline:   ");
  CHECK_THROWS_AS(make_guideline("Q?", "ref", blank.env), ParseError);

  auto s = fixed("Score: 0.5");
  const auto v = score_with_guideline("partial answer", g, s.env);
  CHECK(v.metric_name == "guideline");
  CHECK(v.score == 0.5);
  auto over = fixed("Score: 2");
  CHECK_FALSE(score_with_guideline("x", g, over.env).parse_ok);
}

TEST_CASE("succinctness and correctness") {
  auto a = fixed("Score: 5\nExplanation: to the point.");
  CHECK(rate_succinctness("short", "ref", a.env).score == 5);
  auto b = fixed("Score: 2\nExplanation: wordy.");
  CHECK(rate_succinctness("long", "ref", b.env).score == 2);
  auto c = fixed("Grade: partially correct\nExplanation: misses the cost.");
  const auto pc = rate_correctness("a", "ref", c.env);
  CHECK(pc.grade == Grade::PartiallyCorrect);
  CHECK(pc.score == 0.5);
  auto d = fixed("Grade: correct");
  CHECK(rate_correctness("a", "ref", d.env).grade == Grade::Correct);
  CHECK(grade_name(Grade::PartiallyCorrect) == "partially_correct");
  CHECK(grade_value(Grade::Incorrect) == 0.0);
}

TEST_CASE("variance harness") {
  SUBCASE("deterministic stub") {
    auto e = fixed("Score: 4");
    const auto r = judge_with_variance([&](int t) { return rate_fluency("Q?", e.env, t); }, "item");
    CHECK(r.trials.size() == kJudgeTrials);
    CHECK(r.parsed == 5);
    CHECK(r.mean == 4);
    CHECK(r.stddev == 0);
    for (int t = 0; t < 5; ++t) CHECK(r.trials[t].trial_index == t);
  }
  SUBCASE("cycling stub 3,4,3,4,3") {
    Env e(llm::make_cycling_stub({"Score: 3", "Score: 4"}));
    const auto r = judge_with_variance([&](int t) { return rate_fluency("Q?", e.env, t); }, "item");
    CHECK(std::abs(r.mean - 3.4) <= 1e-9);
    CHECK(r.stddev == doctest::Approx(std::sqrt(0.24)).epsilon(1e-12));
    CHECK(std::abs(r.stddev - 0.49) < 0.01);
  }
  SUBCASE("categorical majority") {
    Env e(llm::make_cycling_stub({"Grade: correct", "Grade: partially correct"}));
    const auto r = judge_with_variance([&](int t) { return rate_correctness("a", "ref", e.env, t); }, "item");
    CHECK(r.majority == Grade::Correct);
  }
  SUBCASE("unparseable trials") {
    Env e(llm::make_cycling_stub({"nonsense", "Score: 2"}));
    const auto r = judge_with_variance([&](int t) { return rate_fluency("Q?", e.env, t); }, "item");
    CHECK(r.parsed == 2);
    CHECK(r.mean == 2);
    auto none = fixed("nonsense");
    CHECK_THROWS_AS(judge_with_variance([&](int t) { return rate_fluency("Q?", none.env, t); }, "item"),
                    EvaluationError);
  }
  CHECK(majority_grade({Grade::Correct, Grade::Incorrect}) == Grade::Incorrect);
  CHECK(majority_grade({Grade::Correct, Grade::Correct, Grade::PartiallyCorrect}) == Grade::Correct);
  CHECK_FALSE(majority_grade({}).has_value());
  CHECK(population_stddev({1, 1, 1}) == 0);
  CHECK(mean_of({}) == 0);
}

TEST_CASE("aggregate_report") {
  CHECK(aggregate_report({}).rows.empty());

  std::vector<JudgeVerdict> flat;
  for (int i = 0; i < 100; ++i) flat.push_back(verdict("guideline", "i" + std::to_string(i), 0.8, 0));
  const auto t = aggregate_report(flat);
  REQUIRE(t.rows.size() == 1);
  REQUIRE(t.rows[0].base.has_value());
  CHECK(t.rows[0].base->value == doctest::Approx(0.8));
  CHECK(t.rows[0].base->stddev == 0.0);
  CHECK(t.rows[0].base->items == 100);
  CHECK(format_cell(*t.rows[0].base, Scale::ZeroToOne) == "80% ± 0%");
  CHECK_FALSE(t.rows[0].rag.has_value());
}

TEST_CASE("aggregate_report matches a brute-force recomputation") {
  std::mt19937_64 rng(12);
  std::vector<JudgeVerdict> vs;
  const std::vector<std::string> metrics{"guideline", "succinctness", "correctness"};
  for (int n = 0; n < 600; ++n) {
    const auto& m = metrics[rng() % 3];
    double score = m == "guideline" ? (rng() % 11) / 10.0 : m == "succinctness" ? double(1 + rng() % 5)
                                                                                  : (rng() % 3) / 2.0;
    vs.push_back(verdict(m, "i" + std::to_string(rng() % 15), score, int(rng() % 5), rng() % 2,
                         rng() % 2 ? "a" : "b", rng() % 10 != 0));
  }
  const auto table = aggregate_report(vs);
  std::size_t cells = 0;
  for (const auto& row : table.rows) {
    for (bool rag : {false, true}) {
      const auto& cell = rag ? row.rag : row.base;
      std::map<std::string, std::vector<double>> items;
      std::map<int, std::vector<double>> trials;
      for (const auto& v : vs) {
        if (!v.parse_ok || v.subject != row.subject || v.metric_name != row.metric || v.rag != rag) continue;
        const double x = row.metric == "correctness" ? (v.grade == Grade::Correct ? 1.0 : 0.0) : v.score;
        items[v.item_id].push_back(x);
        trials[v.trial_index].push_back(x);
      }
      if (items.empty()) {
        CHECK_FALSE(cell.has_value());
        continue;
      }
      REQUIRE(cell.has_value());
      ++cells;
      oracle::Vec means, tmeans;
      std::size_t pass = 0;
      for (auto& [_, xs] : items) {
        means.push_back(oracle::mean(xs));
        if (means.back() >= kGuidelinePassThreshold) ++pass;
      }
      for (auto& [_, xs] : trials) tmeans.push_back(oracle::mean(xs));
      CHECK(cell->items == items.size());
      CHECK(cell->value == doctest::Approx(oracle::mean(means)).epsilon(1e-12));
      CHECK(cell->stddev == doctest::Approx(oracle::population_stddev(tmeans)).epsilon(1e-12));
      if (row.metric == "guideline") CHECK(cell->pass_fraction == doctest::Approx(double(pass) / items.size()));
    }
  }
  CHECK(cells == 12);
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const auto& a = table.rows[i - 1];
    const auto& b = table.rows[i];
    CHECK(std::tie(a.fine_tuned, a.subject, a.metric) < std::tie(b.fine_tuned, b.subject, b.metric));
  }

  std::ostringstream csv;
  write_report_csv(csv, table);
  CHECK(csv.str().rfind("model,fine_tuned,metric,rag,items,value,stddev,pass_fraction\n", 0) == 0);
  CHECK(report_markdown(table).find("| Model | Fine-tuned | Accuracy | +RAG |") != std::string::npos);
}

TEST_CASE("verdict JSON round trip") {
  auto v = verdict("correctness", "q1", 0.5, 3, true, "tuned");
  v.fine_tuned = true;
  v.explanation = "why";
  v.raw_response = "Grade: partially correct";
  CHECK(verdict_from_json(to_json(v)) == v);
}
