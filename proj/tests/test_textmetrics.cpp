#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qagen/textmetrics/details.hpp"
#include "qagen/textmetrics/distribution.hpp"
#include "qagen/textmetrics/diversity.hpp"
#include "qagen/textmetrics/transport.hpp"
#include "qagen/textmetrics/wmd.hpp"

using namespace qagen;
using namespace qagen::textmetrics;

namespace {

WordDistribution two_point(double a, double b) { return {{"a", "b"}, {a, b}, 1.0}; }

struct RandomWords {
  std::vector<std::string> vocab;
  std::map<std::string, oracle::Vec> vectors;
  WordEmbeddingTable table;

  RandomWords(std::size_t n, std::size_t dims, std::mt19937_64& rng) : table(dims) {
    for (std::size_t i = 0; i < n; ++i) {
      vocab.push_back("w" + std::to_string(i));
      vectors[vocab.back()] = oracle::gaussian(rng, dims);
      table.add(vocab.back(), vectors[vocab.back()]);
    }
  }

  std::vector<std::string> draw(std::mt19937_64& rng, std::size_t max_len) const {
    std::vector<std::string> out(1 + rng() % max_len);
    for (auto& t : out) t = vocab[rng() % vocab.size()];
    return out;
  }
};

std::string join(const std::vector<std::string>& toks) {
  std::string s;
  for (const auto& t : toks) s += (s.empty() ? "" : " ") + t;
  return s;
}

}  // namespace

TEST_CASE("word_distribution") {
  const std::vector<std::string> vocab{"a", "b"};
  const auto d = word_distribution("a a b", vocab, 1.0);
  CHECK(d.probs[0] == doctest::Approx(3.0 / 5));
  CHECK(d.probs[1] == doctest::Approx(2.0 / 5));
  const auto u = word_distribution("", vocab, 1.0);
  CHECK(u.probs[0] == doctest::Approx(0.5));
  CHECK(u.probs[1] == doctest::Approx(0.5));
  // Tokens outside the vocabulary carry no mass.
  CHECK(word_distribution("a a b zz", vocab, 1.0).probs == d.probs);
  CHECK_THROWS_AS(word_distribution("a", vocab, 0.0), ArgumentError);
  CHECK_THROWS_AS(word_distribution("a", std::vector<std::string>{}, 1.0), ArgumentError);
  CHECK_THROWS_AS(word_distribution("a", std::vector<std::string>{"a", "a"}, 1.0), ArgumentError);
  CHECK(union_vocabulary(std::vector<std::string>{"B a", "c, a"}) == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("distributions sum to one") {
  std::mt19937_64 rng(3);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e"};
  for (int i = 0; i < 50; ++i) {
    std::string text;
    for (int t = 0; t < int(rng() % 20); ++t) text += vocab[rng() % 5] + " ";
    const auto d = word_distribution(text, vocab, 0.1 + (rng() % 10) / 5.0);
    double s = 0;
    for (double p : d.probs) s += p;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("kl_divergence") {
  const auto p = two_point(0.5, 0.5), q = two_point(0.9, 0.1);
  const double expected = 0.5 * std::log(5.0 / 9.0) + 0.5 * std::log(5.0);
  CHECK(kl_divergence(p, q) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(kl_divergence(p, q) - 0.51083) < 1e-4);
  CHECK(kl_divergence(p, p) == 0.0);
  CHECK(kl_divergence(q, p) != doctest::Approx(kl_divergence(p, q)));
  WordDistribution other{{"a", "c"}, {0.5, 0.5}, 1.0};
  CHECK_THROWS_AS(kl_divergence(p, other), ArgumentError);
}

TEST_CASE("overlap_score") {
  const std::string source = "Cover crops reduce erosion.";
  const std::vector<std::string> same{source};
  CHECK(overlap_score(source, same).value == doctest::Approx(0.0).epsilon(1e-15));
  const std::vector<std::string> disjoint{"What about hazelnut blight?"};
  CHECK(overlap_score(source, disjoint).value > 0.0);
}

TEST_CASE("overlap_score matches a direct recomputation") {
  const std::string source =
      "Wheat needs nitrogen in spring. Nitrogen rates follow yield goals. Soil tests guide the rate.";
  const std::vector<std::string> questions{"How much nitrogen does wheat need?", "What guides the nitrogen rate?"};
  // Union vocabulary by hand, lowercased and sorted.
  const std::vector<std::string> vocab{"does", "follow", "goals", "guide", "guides", "how", "in", "much", "need",
                                       "needs", "nitrogen", "rate", "rates", "soil", "spring", "tests", "the",
                                       "what", "wheat", "yield"};
  std::map<std::string, double> src{{"wheat", 1}, {"needs", 1}, {"nitrogen", 2}, {"in", 1}, {"spring", 1},
                                    {"rates", 1}, {"follow", 1}, {"yield", 1}, {"goals", 1}, {"soil", 1},
                                    {"tests", 1}, {"guide", 1}, {"the", 1}, {"rate", 1}};
  std::map<std::string, double> qs{{"how", 1}, {"much", 1}, {"nitrogen", 2}, {"does", 1}, {"wheat", 1},
                                   {"need", 1}, {"what", 1}, {"guides", 1}, {"the", 1}, {"rate", 1}};
  const double alpha = 0.5, n_src = 15, n_q = 11, v = 20;
  double expected = 0;
  for (const auto& t : vocab) {
    const double p = (src[t] + alpha) / (n_src + alpha * v);
    const double q = (qs[t] + alpha) / (n_q + alpha * v);
    expected += p * std::log(p / q);
  }
  const auto got = overlap_score(source, questions, KlDirection::SourceToQuestions, alpha);
  CHECK(got.vocab_size == vocab.size());
  CHECK(got.value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(got.direction == KlDirection::SourceToQuestions);

  double reverse = 0;
  for (const auto& t : vocab) {
    const double p = (src[t] + alpha) / (n_src + alpha * v);
    const double q = (qs[t] + alpha) / (n_q + alpha * v);
    reverse += q * std::log(q / p);
  }
  CHECK(overlap_score(source, questions, KlDirection::QuestionsToSource, alpha).value ==
        doctest::Approx(reverse).epsilon(1e-12));
}

TEST_CASE("transport solver matches basis enumeration") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int round = 0; round < 120; ++round) {
    const std::size_t m = 1 + rng() % 4, n = 1 + rng() % 4;
    std::vector<double> supply(m), demand(n);
    double ts = 0, td = 0;
    for (auto& x : supply) ts += x = u(rng);
    for (auto& x : demand) td += x = u(rng);
    for (auto& x : demand) x *= ts / td;
    Matrix cost(m, n);
    std::vector<oracle::Vec> c(m, oracle::Vec(n));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) c[i][j] = cost(i, j) = (round % 3 == 0) ? double(rng() % 3) : u(rng);
    const auto plan = solve_transport(supply, demand, cost);
    CHECK(plan.cost == doctest::Approx(oracle::transport_min_cost(supply, demand, c)).epsilon(1e-9));

    std::vector<double> rows(m, 0.0), cols(n, 0.0);
    double cost_sum = 0;
    for (const auto& [cell, f] : plan.flows) {
      CHECK(f > 0.0);
      rows[cell.first] += f;
      cols[cell.second] += f;
      cost_sum += f * cost(cell.first, cell.second);
    }
    for (std::size_t i = 0; i < m; ++i) CHECK(rows[i] == doctest::Approx(supply[i]).epsilon(1e-9));
    for (std::size_t j = 0; j < n; ++j) CHECK(cols[j] == doctest::Approx(demand[j]).epsilon(1e-9));
    CHECK(cost_sum == doctest::Approx(plan.cost).epsilon(1e-9));
  }
}

TEST_CASE("transport input validation") {
  const std::vector<double> s{0.5, 0.5}, d{1.0}, bad{-1.0, 2.0};
  CHECK_THROWS_AS(solve_transport(s, d, Matrix(1, 1)), ArgumentError);
  CHECK_THROWS_AS(solve_transport(bad, d, Matrix(2, 1)), ArgumentError);
  CHECK_THROWS_AS(solve_transport(s, std::vector<double>{3.0}, Matrix(2, 1)), ArgumentError);
  CHECK(solve_transport(s, d, Matrix(2, 1, 2.0)).cost == doctest::Approx(2.0));
}

TEST_CASE("wmd basics") {
  std::mt19937_64 rng(8);
  RandomWords words(6, 3, rng);
  CHECK(wmd("w0 w1 w2", "w0 w1 w2", words.table).distance == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(wmd("w0 w1", "w1 w0", words.table).distance == doctest::Approx(0.0).epsilon(1e-12));
  const double ab = wmd("w0 w1 w1", "w3 w4", words.table).distance;
  const double ba = wmd("w3 w4", "w0 w1 w1", words.table).distance;
  CHECK(std::abs(ab - ba) <= 1e-9);
  // Single words: distance is the euclidean distance of their vectors.
  CHECK(wmd("w2", "w5", words.table).distance ==
        doctest::Approx(oracle::euclid(words.vectors["w2"], words.vectors["w5"])));
}

TEST_CASE("wmd on a 3x3 toy problem matches the oracle") {
  WordEmbeddingTable table(2);
  const std::map<std::string, oracle::Vec> vecs{{"a", {0, 0}}, {"b", {1, 0}}, {"c", {0, 2}},
                                                {"d", {3, 1}}, {"e", {1, 1}}, {"f", {-1, 2}}};
  for (const auto& [t, v] : vecs) table.add(t, v);
  const auto r = wmd("a b c a", "d e f", table);
  CHECK(r.distance == doctest::Approx(oracle::wmd({"a", "b", "c", "a"}, {"d", "e", "f"}, vecs)).epsilon(1e-9));
  CHECK(r.source.tokens == std::vector<std::string>{"a", "b", "c"});
  CHECK(r.source.weights[0] == doctest::Approx(0.5));
  CHECK(relaxed_wmd_lower_bound(r.source, r.target, table) <= r.distance + 1e-12);
}

TEST_CASE("wmd random instances and metric properties") {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 60; ++round) {
    RandomWords words(5 + rng() % 4, 1 + rng() % 3, rng);
    const auto a = words.draw(rng, 4), b = words.draw(rng, 4), c = words.draw(rng, 4);
    const double ab = wmd(join(a), join(b), words.table).distance;
    CHECK(ab == doctest::Approx(oracle::wmd(a, b, words.vectors)).epsilon(1e-9));
    const double bc = wmd(join(b), join(c), words.table).distance;
    const double ac = wmd(join(a), join(c), words.table).distance;
    CHECK(ac <= ab + bc + 1e-6);
    CHECK(std::abs(ab - wmd(join(b), join(a), words.table).distance) <= 1e-9);
    const auto na = make_nbow(join(a), words.table), nb = make_nbow(join(b), words.table);
    CHECK(relaxed_wmd_lower_bound(na, nb, words.table) <= ab + 1e-9);
  }
}

TEST_CASE("wmd out-of-vocabulary handling") {
  WordEmbeddingTable table(1);
  table.add("soil", {0.0});
  table.add("water", {1.0});
  const auto doc = make_nbow("soil zzz water soil", table);
  CHECK(doc.tokens == std::vector<std::string>{"soil", "water"});
  CHECK(doc.weights[0] == doctest::Approx(2.0 / 3));
  CHECK(doc.dropped_oov == std::vector<std::string>{"zzz"});
  try {
    make_nbow("qqq rrr", table);
    FAIL("expected OovError");
  } catch (const OovError& e) {
    CHECK(e.tokens().size() == 2);
  }
  CHECK_THROWS_AS(table.add("x", {1.0, 2.0}), ArgumentError);
  CHECK_THROWS_AS(table.at("nope"), OovError);
}

TEST_CASE("word vectors load from text") {
  const auto path = std::filesystem::temp_directory_path() / "qagen_vectors.txt";
  std::ofstream(path) << "2 3\nsoil 1 0 0\nwater 0 1 0\n";
  const auto table = WordEmbeddingTable::load_text(path);
  CHECK(table.size() == 2);
  CHECK(table.dims() == 3);
  CHECK(table.at("water") == std::vector<double>{0, 1, 0});
  std::filesystem::remove(path);
  const std::vector<std::string> vocab{"a", "b"};
  const auto s1 = WordEmbeddingTable::synthetic(vocab, 4, 1), s2 = WordEmbeddingTable::synthetic(vocab, 4, 1);
  CHECK(s1.at("a") == s2.at("a"));
  CHECK(s1.scaled(2.0).at("b")[0] == doctest::Approx(2 * s1.at("b")[0]));
}

TEST_CASE("diversity_score") {
  std::mt19937_64 rng(5);
  RandomWords words(8, 3, rng);
  const std::vector<std::string> same(4, "w1 w2 w3");
  const auto zero = diversity_score(same, words.table);
  CHECK(zero.score == doctest::Approx(0.0).epsilon(1e-12));

  const std::vector<std::string> two{"w0 w1", "w5 w6 w7"};
  CHECK(diversity_score(two, words.table).score == doctest::Approx(wmd(two[0], two[1], words.table).distance));

  const std::vector<std::string> four{"w0 w1 w2", "w3", "w4 w4 w5", "w6 w7 w0 w2"};
  const auto d = diversity_score(four, words.table, {}, 3);
  double total = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(d.matrix(i, i) == 0.0);
    for (std::size_t j = 0; j < 4; ++j) {
      if (i == j) continue;
      const double w = wmd(four[i], four[j], words.table).distance;
      CHECK(d.matrix(i, j) == doctest::Approx(w).epsilon(1e-12));
      CHECK(d.matrix(i, j) == d.matrix(j, i));
      total += w;
    }
  }
  CHECK(d.score == doctest::Approx(total / 12).epsilon(1e-12));
  CHECK(diversity_score(four, words.table).score == doctest::Approx(d.score).epsilon(1e-12));
  CHECK_THROWS_AS(diversity_score(std::vector<std::string>{"w1"}, words.table), ArgumentError);
}

TEST_CASE("details") {
  CHECK(details("", "").question_tokens == 0);
  CHECK(details("", "").answer_tokens == 0);
  CHECK(details("two words", "").question_tokens == 2);
  const std::string sentence = "Soil samples should be collected from the top twelve inches of each field";
  std::size_t split = 0;
  for (std::size_t i = 0; i < sentence.size(); ++i)
    if (sentence[i] != ' ' && (i == 0 || sentence[i - 1] == ' ')) ++split;
  const auto d = details("What should be sampled?", sentence);
  CHECK(d.question_tokens == 4);
  CHECK(d.answer_tokens == split);
}

TEST_CASE("metric records round-trip") {
  MetricRecord r{"overlap", 0.25, {{"smoothing", 1.0}}, "abc"};
  const auto back = metric_record_from_json(to_json(r));
  CHECK(back.metric == "overlap");
  CHECK(back.value == 0.25);
  CHECK(back.parameters == r.parameters);
  CHECK(back.inputs_digest == "abc");
}
