#include "qagen/pipeline/offline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "qagen/corpus/tokenizer.hpp"

namespace qagen::pipeline {

namespace {

using nlohmann::json;

const std::vector<std::string>& locations() {
  static const std::vector<std::string> v = {
      "Alabama", "Alaska", "Arizona", "Arkansas", "California", "Colorado", "Connecticut", "Delaware", "Florida",
      "Georgia", "Hawaii", "Idaho", "Illinois", "Indiana", "Iowa", "Kansas", "Kentucky", "Louisiana", "Maine",
      "Maryland", "Massachusetts", "Michigan", "Minnesota", "Mississippi", "Missouri", "Montana", "Nebraska",
      "Nevada", "New Hampshire", "New Jersey", "New Mexico", "New York", "North Carolina", "North Dakota", "Ohio",
      "Oklahoma", "Oregon", "Pennsylvania", "Rhode Island", "South Carolina", "South Dakota", "Tennessee", "Texas",
      "Utah", "Vermont", "Virginia", "Washington", "West Virginia", "Wisconsin", "Wyoming", "Brazil", "India",
      "Canada", "Mexico", "Palouse", "Pacific Northwest", "Yakima Valley", "Columbia Basin"};
  return v;
}

const std::vector<std::string>& crops() {
  static const std::vector<std::string> v = {"wheat",   "barley", "canola", "corn",    "maize",  "soybean",
                                             "soybeans", "potato", "potatoes", "apple", "apples",  "cherry",
                                             "cherries", "hops",   "rice",    "cotton",  "alfalfa", "lentil",
                                             "lentils",  "chickpea", "chickpeas", "peas", "quinoa", "sorghum",
                                             "grapes",  "oats",   "sugarcane", "coffee"};
  return v;
}

const std::vector<std::string>& cattle() {
  static const std::vector<std::string> v = {"cattle", "cow", "cows", "beef", "dairy", "heifer", "heifers",
                                             "calves", "steer", "steers", "bulls"};
  return v;
}

const std::vector<std::string>& diseases() {
  static const std::vector<std::string> v = {"stripe rust", "rust", "blight", "powdery mildew", "mildew",
                                             "root rot",   "rot",  "scab",   "smut",           "mosaic virus",
                                             "wilt",       "nematode", "nematodes", "mastitis", "brucellosis",
                                             "foot rot",   "bovine respiratory disease"};
  return v;
}

const std::set<std::string>& stopwords() {
  static const std::set<std::string> s = {
      "a",    "an",   "and",  "are",  "as",   "at",   "be",    "by",    "can",  "do",    "does", "for",
      "from", "has",  "have", "how",  "in",   "is",   "it",    "its",   "of",   "on",    "or",   "that",
      "the",  "their", "this", "to",  "was",  "what", "when",  "which", "who",  "why",   "with", "known",
      "about", "according", "document", "say", "says", "answer", "should", "mention", "there", "these", "they"};
  return s;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::set<std::string> content_words(std::string_view text) {
  std::set<std::string> out;
  for (auto& t : corpus::tokenize(text))
    if (!stopwords().count(t)) out.insert(std::move(t));
  return out;
}

// |a ∩ b| / |b|, 0 for an empty b.
double recall_of(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (b.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& w : b) hit += a.count(w);
  return static_cast<double>(hit) / static_cast<double>(b.size());
}

int to_five(double r) { return 1 + static_cast<int>(std::lround(std::clamp(r, 0.0, 1.0) * 4.0)); }

// Byte offset of the first whole-word match of `term`, npos when absent.
std::size_t find_word(std::string_view text, std::string_view term, bool case_sensitive) {
  std::string hay(text), needle(term);
  if (!case_sensitive) {
    for (char& c : hay) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (char& c : needle) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  for (std::size_t p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) {
    const bool left = p == 0 || !std::isalnum(static_cast<unsigned char>(hay[p - 1]));
    const std::size_t e = p + needle.size();
    const bool right = e >= hay.size() || !std::isalnum(static_cast<unsigned char>(hay[e]));
    if (left && right) return p;
  }
  return std::string::npos;
}

bool contains_word(std::string_view text, std::string_view term, bool case_sensitive) {
  return find_word(text, term, case_sensitive) != std::string::npos;
}

// Dictionary terms found in `text`, in order of first appearance.
std::vector<std::string> find_terms(std::string_view text, const std::vector<std::string>& terms, bool cs) {
  std::vector<std::pair<std::size_t, std::string>> hits;
  for (const auto& t : terms)
    if (auto p = find_word(text, t, cs); p != std::string::npos) hits.emplace_back(p, t);
  std::stable_sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> out;
  for (auto& [_, t] : hits) out.push_back(std::move(t));
  return out;
}

std::string list_literal(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", '" : "'") + items[i] + "'";
  return out + "]";
}

std::string user_text(const llm::CompletionRequest& r) {
  std::string out;
  for (const auto& m : r.messages)
    if (m.role == llm::Role::User) out = m.content;
  return out;
}

std::string system_text(const llm::CompletionRequest& r) {
  for (const auto& m : r.messages)
    if (m.role == llm::Role::System) return m.content;
  return {};
}

// Text after `label` up to the next blank line (or `until`).
std::string field(std::string_view text, std::string_view label, std::string_view until = "\n\n") {
  const auto p = text.find(label);
  if (p == std::string_view::npos) return {};
  const auto start = p + label.size();
  const auto end = text.find(until, start);
  return trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
}

std::vector<std::string> sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    cur.push_back(c == '\n' ? ' ' : c);
    const bool end = (c == '.' || c == '?' || c == '!') &&
                     (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])));
    if (end || c == '\n') {
      auto s = trim(cur);
      if (corpus::count_tokens(s) >= 3) out.push_back(std::move(s));
      cur.clear();
    }
  }
  auto s = trim(cur);
  if (corpus::count_tokens(s) >= 3) out.push_back(std::move(s));
  return out;
}

std::string section_of_generation_prompt(const std::string& user) {
  const auto p = user.find("assess knowledge of the text below");
  if (p == std::string::npos) return user;
  const auto start = user.find("\n\n", p);
  return start == std::string::npos ? std::string{} : trim(std::string_view(user).substr(start + 2));
}

// A declarative sentence turned into a yes/no question about itself.
std::string question_for(std::string sentence, const std::string& location) {
  while (!sentence.empty() && (sentence.back() == '.' || sentence.back() == '!' || sentence.back() == '?'))
    sentence.pop_back();
  const auto first_end = sentence.find(' ');
  const std::string first = sentence.substr(0, first_end);
  const bool proper = std::find(locations().begin(), locations().end(), first) != locations().end();
  if (!sentence.empty() && !proper && (sentence.size() < 2 || !std::isupper(static_cast<unsigned char>(sentence[1]))))
    sentence[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(sentence[0])));
  std::string q = "Is it true that " + sentence;
  if (!location.empty() && !contains_word(sentence, location, true)) q += " in " + location;
  return q + "?";
}

std::string context_location(const std::string& system) {
  const std::string raw = field(system, "encoded as JSON: ", "\n");
  const json j = json::parse(raw, nullptr, false);
  if (!j.is_object()) return {};
  if (j.contains("location") && j["location"].is_string()) return j["location"];
  if (j.contains("locations") && j["locations"].is_array() && !j["locations"].empty() &&
      j["locations"][0].is_string())
    return j["locations"][0];
  return {};
}

std::vector<std::pair<std::string, std::string>> offline_questions(const llm::CompletionRequest& r) {
  const std::string user = user_text(r);
  const std::string section = section_of_generation_prompt(user);
  const std::string loc = context_location(system_text(r));
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : sentences(section)) {
    if (out.size() == 15) break;
    out.emplace_back(question_for(s, loc), s);
  }
  return out;
}

std::string score_reply(int score, const std::string& why) {
  return "Score: " + std::to_string(score) + "\nExplanation: " + why;
}

std::string respond_judge(const std::string& metric, const llm::CompletionRequest& r) {
  const std::string user = user_text(r);
  const std::string question = field(user, "Question: ");
  if (metric == "relevance") {
    const double rr = recall_of(content_words(field(user, "Context:\n", "\n\nQuestion: ")), content_words(question));
    return score_reply(to_five(rr), "The question shares vocabulary with the context.");
  }
  if (metric == "global_relevance") {
    std::size_t hits = 0;
    for (const auto* list : {&crops(), &cattle(), &diseases()}) hits += find_terms(question, *list, false).size();
    for (const char* w : {"soil", "farm", "farmers", "crop", "crops", "irrigation", "yield", "fertilizer", "pest",
                          "weed", "harvest", "planting", "livestock", "grazing", "seed", "nitrogen"})
      hits += contains_word(question, w, false);
    return score_reply(static_cast<int>(std::min<std::size_t>(5, 2 + hits)), "Topic words found in the question.");
  }
  if (metric == "coverage") {
    const double rr = recall_of(content_words(field(user, "Context:\n", "\n\nQuestion: ")), content_words(field(user, "Answer: ")));
    return score_reply(to_five(rr), "Share of answer words present in the context.");
  }
  if (metric == "fluency") {
    const std::size_t words = corpus::count_tokens(question);
    int s = 3;
    if (!question.empty() && question.back() == '?') s = (words >= 5 && words <= 30) ? 5 : 4;
    return score_reply(s, "Judged from punctuation and length.");
  }
  if (metric == "coherence") {
    const double rr = recall_of(content_words(field(user, "Ground truth: ", "\n\nPredicted answer: ")),
                                content_words(field(user, "Predicted answer: ", "\n\nReply with")));
    return score_reply(to_five(rr), "Share of answer words consistent with the ground truth.");
  }
  if (metric == "answer_relevance") {
    const double rr =
        recall_of(content_words(field(user, "Predicted answer: ", "\n\nReply with")), content_words(question));
    return score_reply(to_five(rr), "Share of the question addressed by the answer.");
  }
  if (metric == "groundedness") {
    const double rr =
        recall_of(content_words(field(user, "Context:\n", "\n\nQuestion: ")), content_words(field(user, "Predicted answer: ", "\n\nReply with")));
    return score_reply(to_five(rr), "Share of answer words supported by the context.");
  }
  if (metric == "make_guideline") {
    std::string ref = field(user, "Answer: ");
    if (!ref.empty()) ref[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(ref[0])));
    return "Evaluation_guideline: The answer should mention that " + ref;
  }
  if (metric == "guideline") {
    std::string g = field(user, "Evaluation_guideline: ");
    const std::string answer = field(user, "Answer: ");
    const double rr = recall_of(content_words(answer), content_words(g));
    char buf[64];
    std::snprintf(buf, sizeof buf, "Score: %.2f\nExplanation: Share of guideline points covered.", rr);
    return buf;
  }
  if (metric == "succinctness") {
    const double ref = static_cast<double>(corpus::count_tokens(field(user, "Ground truth answer: ")));
    const double ans = static_cast<double>(corpus::count_tokens(field(user, "Answer to grade: ")));
    int s = 1;
    if (ans > 0 && ref > 0) {
      const double ratio = ans / ref;
      s = ratio <= 1.25 ? 5 : ratio <= 1.75 ? 4 : ratio <= 2.5 ? 3 : ratio <= 4.0 ? 2 : 1;
    }
    return score_reply(s, "Length relative to the ground truth.");
  }
  if (metric == "correctness") {
    const double rr =
        recall_of(content_words(field(user, "Answer to grade: ")), content_words(field(user, "Ground truth answer: ")));
    const char* grade = rr >= 0.8 ? "correct" : rr >= 0.4 ? "partially correct" : "incorrect";
    return std::string("Score: ") + grade + "\nExplanation: Key points of the ground truth found in the answer.";
  }
  return "Score: 3\nExplanation: No heuristic for this metric.";
}

std::string respond(const llm::CompletionRequest& r) {
  const std::string& purpose = r.purpose;
  if (purpose == "tag") {
    const std::string user = r.messages.front().content;
    const std::string text = field(user, "Text:\n", "\n\nAnswer the following questions with a single Yes or No");
    const auto locs = find_terms(text, locations(), true);
    const auto cr = find_terms(text, crops(), false);
    const auto ca = find_terms(text, cattle(), false);
    const auto di = find_terms(text, diseases(), false);
    auto yn = [](const std::vector<std::string>& v) { return v.empty() ? "No" : "Yes"; };
    return std::string("1. ") + yn(locs) + "\n2. " + yn(cr) + "\n3. " + yn(ca) + "\n4. " + yn(di) + "\n\n1. " +
           list_literal(locs) + "\n2. " + list_literal(cr) + "\n3. " + list_literal(ca) + "\n4. " +
           list_literal(di) + "\n";
  }
  if (purpose == "genq") {
    std::string out;
    std::size_t i = 0;
    for (const auto& [q, _] : offline_questions(r)) out += std::to_string(++i) + ". " + q + "\n";
    return out.empty() ? "No questions can be formed from this text." : out;
  }
  if (purpose == "combined") {
    std::string out;
    for (const auto& [q, a] : offline_questions(r)) out += "Q: " + q + "\nA: " + a + "\n\n";
    return out.empty() ? "No questions can be formed from this text." : out;
  }
  if (purpose == "gena" || purpose == "eval_rag") {
    const std::string user = user_text(r);
    const std::string snippets = field(user, "Reference snippets:\n", "\n\nQuestion: ");
    const auto q = content_words(field(user, "Question: "));
    std::string best;
    double best_score = -1.0;
    for (const auto& s : sentences(snippets)) {
      std::string clean = s;
      if (clean.size() > 4 && clean[0] == '[') clean = trim(clean.substr(clean.find(']') + 1));
      const double sc = recall_of(content_words(clean), q);
      if (sc > best_score) {
        best_score = sc;
        best = clean;
      }
    }
    return best.empty() ? "The snippets do not contain this information." : best;
  }
  if (purpose == "answer" || purpose == "eval_answer") {
    return "In general, this depends on local soil, climate and management conditions, so growers should consult "
           "their local extension office for specific recommendations.";
  }
  if (purpose.rfind("judge:", 0) == 0) return respond_judge(purpose.substr(6), r);
  return "OK";
}

}  // namespace

llm::Responder make_offline_responder() { return respond; }

std::shared_ptr<llm::ChatBackend> make_offline_backend(const std::string& name) {
  return std::make_shared<llm::StubBackend>(name, make_offline_responder());
}

}  // namespace qagen::pipeline
