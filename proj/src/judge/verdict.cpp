#include "qagen/judge/verdict.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "qagen/error.hpp"

namespace qagen::judge {

using nlohmann::json;

std::string_view scale_name(Scale s) {
  switch (s) {
    case Scale::OneToFive: return "1-5";
    case Scale::ZeroToOne: return "0-1";
    default: return "three_way";
  }
}

Scale parse_scale(std::string_view name) {
  if (name == "1-5") return Scale::OneToFive;
  if (name == "0-1") return Scale::ZeroToOne;
  if (name == "three_way") return Scale::ThreeWay;
  throw ArgumentError("unknown scale: " + std::string(name));
}

std::string_view grade_name(Grade g) {
  switch (g) {
    case Grade::Correct: return "correct";
    case Grade::PartiallyCorrect: return "partially_correct";
    default: return "incorrect";
  }
}

double grade_value(Grade g) {
  switch (g) {
    case Grade::Correct: return 1.0;
    case Grade::PartiallyCorrect: return 0.5;
    default: return 0.0;
  }
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Whole-token grade at the start of `text` (after trimming and stripping
// quotes / asterisks), e.g. "Partially correct." -> PartiallyCorrect.
std::optional<Grade> leading_grade(std::string_view text) {
  std::string t = lower(trim(text));
  t.erase(std::remove_if(t.begin(), t.end(), [](char c) { return c == '*' || c == '"' || c == '\''; }), t.end());
  for (char& c : t)
    if (c == '_' || c == '-') c = ' ';
  auto starts = [&](std::string_view w) {
    if (t.compare(0, w.size(), w) != 0) return false;
    return t.size() == w.size() || !std::isalpha(static_cast<unsigned char>(t[w.size()]));
  };
  if (starts("partially correct") || starts("partially")) return Grade::PartiallyCorrect;
  if (starts("incorrect") || starts("not correct")) return Grade::Incorrect;
  if (starts("correct") || starts("fully correct")) return Grade::Correct;
  return std::nullopt;
}

struct NumberToken {
  double value = 0.0;
  std::size_t length = 0;
};

// A decimal number at the start of `s` with an optional "/N" or "out of N"
// denominator. Fails when a denominator other than `max` follows.
std::optional<NumberToken> leading_number(std::string_view s, double max) {
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '*' || s[i] == '"')) ++i;
  const std::size_t start = i;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
  bool digits = false, dot = false;
  while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || (s[i] == '.' && !dot))) {
    if (s[i] == '.') {
      if (i + 1 >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i + 1]))) break;
      dot = true;
    } else {
      digits = true;
    }
    ++i;
  }
  if (!digits) return std::nullopt;
  // Reject things like "3abc" or "3e5" that are not plain scores.
  if (i < s.size() && (std::isalpha(static_cast<unsigned char>(s[i])) || s[i] == '_')) return std::nullopt;
  NumberToken tok;
  const std::string num(s.substr(start, i - start));
  tok.value = std::strtod(num.c_str(), nullptr);
  std::size_t j = i;
  while (j < s.size() && s[j] == ' ') ++j;
  std::size_t denom_at = 0;
  if (j < s.size() && s[j] == '/') denom_at = j + 1;
  else if (lower(s.substr(j, 6)) == "out of") denom_at = j + 6;
  if (denom_at != 0) {
    auto d = leading_number(s.substr(denom_at), -1.0);
    if (!d || d->value != max) return std::nullopt;
    j = denom_at + d->length;
  } else {
    j = i;
  }
  tok.length = j;
  if (!std::isfinite(tok.value)) return std::nullopt;
  return tok;
}

std::optional<std::string_view> after_label(std::string_view line, std::string_view label) {
  const std::string l = lower(line);
  std::size_t i = 0;
  while (i < l.size() && (std::isspace(static_cast<unsigned char>(l[i])) || l[i] == '*' || l[i] == '#')) ++i;
  if (l.compare(i, label.size(), label) != 0) return std::nullopt;
  i += label.size();
  while (i < l.size() && l[i] == '*') ++i;
  if (i >= l.size() || l[i] != ':') return std::nullopt;
  ++i;
  while (i < l.size() && l[i] == '*') ++i;
  return line.substr(i);
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(text.substr(pos, end - pos));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

double scale_max(Scale s) { return s == Scale::OneToFive ? 5.0 : 1.0; }

ParsedScore from_value_text(std::string_view text, Scale scale) {
  ParsedScore p;
  if (scale == Scale::ThreeWay) {
    if (auto g = leading_grade(text)) {
      p.grade = *g;
      p.score = grade_value(*g);
      p.ok = true;
    }
    return p;
  }
  auto tok = leading_number(text, scale_max(scale));
  if (!tok) return p;
  if (!within_scale(tok->value, scale)) return p;
  p.score = tok->value;
  p.ok = true;
  return p;
}

std::string explanation_of(std::string_view raw, std::size_t skip_line) {
  const auto lines = lines_of(raw);
  for (const auto line : lines)
    if (auto rest = after_label(line, "explanation")) {
      std::string out = trim(*rest);
      bool after = false;
      for (const auto l : lines) {
        if (l.data() == line.data()) {
          after = true;
          continue;
        }
        if (after) out += (out.empty() ? "" : "\n") + std::string(l);
      }
      return trim(out);
    }
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i == skip_line) continue;
    out += (out.empty() ? "" : "\n") + std::string(lines[i]);
  }
  return trim(out);
}

}  // namespace

std::optional<Grade> parse_grade(std::string_view text) { return leading_grade(text); }

bool within_scale(double score, Scale scale) {
  if (!std::isfinite(score)) return false;
  switch (scale) {
    case Scale::OneToFive: return score >= 1.0 && score <= 5.0 && std::floor(score) == score;
    case Scale::ZeroToOne: return score >= 0.0 && score <= 1.0;
    default: return score == 0.0 || score == 0.5 || score == 1.0;
  }
}

ParsedScore parse_score(std::string_view raw, Scale scale) {
  const std::string t = trim(raw);
  if (!t.empty() && t.front() == '{') {
    ParsedScore p;
    try {
      const json j = json::parse(t);
      if (!j.is_object() || !j.contains("score")) return p;
      const auto& s = j["score"];
      if (s.is_number()) {
        if (scale == Scale::ThreeWay) return p;
        const double v = s.get<double>();
        if (!within_scale(v, scale)) return p;
        p.score = v;
        p.ok = true;
      } else if (s.is_string()) {
        p = from_value_text(s.get<std::string>(), scale);
        if (!p.ok) return p;
      } else {
        return p;
      }
      if (j.contains("explanation") && j["explanation"].is_string()) p.explanation = j["explanation"];
      return p;
    } catch (const json::exception&) {
      return ParsedScore{};
    }
  }

  const auto lines = lines_of(raw);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::optional<std::string_view> rest = after_label(lines[i], "score");
    if (!rest) rest = after_label(lines[i], "grade");
    if (!rest && scale == Scale::ThreeWay) rest = after_label(lines[i], "correctness");
    if (!rest) continue;
    auto p = from_value_text(*rest, scale);
    if (p.ok) p.explanation = explanation_of(raw, i);
    return p;
  }

  // Leading bare value on the first non-empty line.
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::string first = trim(lines[i]);
    ParsedScore p = from_value_text(first, scale);
    if (p.ok) p.explanation = explanation_of(raw, i);
    return p;
  }
  return ParsedScore{};
}

const std::vector<MetricSpec>& metric_registry() {
  static const std::vector<MetricSpec> registry = {
      {"relevance", Scale::OneToFive, "relevance", MetricTier::Question},
      {"global_relevance", Scale::OneToFive, "global_relevance", MetricTier::Question},
      {"coverage", Scale::OneToFive, "coverage", MetricTier::Question},
      {"fluency", Scale::OneToFive, "fluency", MetricTier::Question},
      {"coherence", Scale::OneToFive, "coherence", MetricTier::Answer},
      {"answer_relevance", Scale::OneToFive, "answer_relevance", MetricTier::Answer},
      {"groundedness", Scale::OneToFive, "groundedness", MetricTier::Answer},
      {"guideline", Scale::ZeroToOne, "guideline", MetricTier::ModelEval},
      {"succinctness", Scale::OneToFive, "succinctness", MetricTier::ModelEval},
      {"correctness", Scale::ThreeWay, "correctness", MetricTier::ModelEval},
  };
  return registry;
}

const MetricSpec& metric_spec(std::string_view name) {
  for (const auto& m : metric_registry())
    if (m.name == name) return m;
  throw ArgumentError("unknown judge metric: " + std::string(name));
}

json to_json(const JudgeVerdict& v) {
  json j = {{"metric", v.metric_name},
            {"score", v.parse_ok ? json(v.score) : json(nullptr)},
            {"grade", v.grade ? json(grade_name(*v.grade)) : json(nullptr)},
            {"explanation", v.explanation},
            {"raw_response", v.raw_response},
            {"parse_ok", v.parse_ok},
            {"trial_index", v.trial_index},
            {"item_id", v.item_id},
            {"subject", v.subject},
            {"fine_tuned", v.fine_tuned},
            {"rag", v.rag}};
  return j;
}

JudgeVerdict verdict_from_json(const json& j) {
  JudgeVerdict v;
  try {
    v.metric_name = j.at("metric").get<std::string>();
    v.parse_ok = j.at("parse_ok").get<bool>();
    if (v.parse_ok) v.score = j.at("score").get<double>();
    if (const auto& g = j.value("grade", json(nullptr)); !g.is_null()) {
      v.grade = parse_grade(g.get<std::string>());
      if (!v.grade) throw SchemaError("grade", "unknown grade " + g.get<std::string>());
    }
    v.explanation = j.value("explanation", std::string{});
    v.raw_response = j.value("raw_response", std::string{});
    v.trial_index = j.value("trial_index", 0);
    v.item_id = j.value("item_id", std::string{});
    v.subject = j.value("subject", std::string{});
    v.fine_tuned = j.value("fine_tuned", false);
    v.rag = j.value("rag", false);
  } catch (const json::exception& e) {
    throw SchemaError("verdict", e.what());
  }
  if (v.parse_ok && !within_scale(v.score, metric_spec(v.metric_name).scale))
    throw SchemaError("score", "verdict score outside the " + v.metric_name + " scale");
  return v;
}

}  // namespace qagen::judge
