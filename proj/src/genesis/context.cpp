#include "qagen/genesis/context.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <optional>

#include "qagen/error.hpp"

namespace qagen::genesis {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Last standalone yes/no word of a line, ignoring the phrase "yes or no".
std::optional<bool> yes_no(std::string_view line) {
  std::string l = lower(line);
  for (std::size_t p; (p = l.find("yes or no")) != std::string::npos;) l.replace(p, 9, " ");
  std::optional<bool> found;
  std::size_t i = 0;
  while (i < l.size()) {
    if (!std::isalpha(static_cast<unsigned char>(l[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < l.size() && std::isalpha(static_cast<unsigned char>(l[j]))) ++j;
    const std::string_view word(l.data() + i, j - i);
    if (word == "yes") found = true;
    if (word == "no") found = false;
    i = j;
  }
  return found;
}

void dedupe(std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (auto& s : items)
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
  items = std::move(out);
}

}  // namespace

std::vector<std::string> parse_list_literal(std::string_view literal) {
  std::string_view s = literal;
  const auto open = s.find('[');
  const auto close = s.rfind(']');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open)
    throw ParseError("not a list literal", 0, std::string(literal));
  s = s.substr(open + 1, close - open - 1);

  std::vector<std::string> items;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == ',')) ++i;
    if (i >= s.size()) break;
    std::string item;
    if (s[i] == '\'' || s[i] == '"') {
      const char q = s[i++];
      const auto end = s.find(q, i);
      if (end == std::string_view::npos) throw ParseError("unterminated quote in list", i, std::string(literal));
      item = s.substr(i, end - i);
      i = end + 1;
      while (i < s.size() && s[i] != ',') ++i;
    } else {
      const auto end = std::min(s.find(',', i), s.size());
      item = s.substr(i, end - i);
      i = end;
    }
    item = trim(item);
    if (!item.empty()) items.push_back(std::move(item));
  }
  dedupe(items);
  return items;
}

SupportingContext parse_supporting_context(std::string_view completion) {
  std::vector<bool> answers;
  std::vector<std::vector<std::string>> lists;
  std::size_t pos = 0;
  while (pos <= completion.size()) {
    auto end = completion.find('\n', pos);
    if (end == std::string_view::npos) end = completion.size();
    const std::string_view line = completion.substr(pos, end - pos);
    pos = end + 1;
    if (line.find('[') != std::string_view::npos) {
      lists.push_back(parse_list_literal(line));
    } else if (answers.size() < 4 && lists.empty()) {
      if (auto yn = yes_no(line)) answers.push_back(*yn);
    }
    if (end == completion.size()) break;
  }
  if (answers.size() < 4)
    throw ParseError("tagging reply has " + std::to_string(answers.size()) + " of 4 yes/no answers", 0,
                     std::string(completion));
  if (lists.size() < 4)
    throw ParseError("tagging reply has " + std::to_string(lists.size()) + " of 4 lists", 0, std::string(completion));

  SupportingContext ctx;
  ctx.mentions_location = answers[0];
  ctx.mentions_crop = answers[1];
  ctx.mentions_cattle = answers[2];
  ctx.mentions_disease = answers[3];
  if (ctx.mentions_location) ctx.locations = lists[0];
  if (ctx.mentions_crop) ctx.crops = lists[1];
  if (ctx.mentions_cattle) ctx.cattles = lists[2];
  if (ctx.mentions_disease) ctx.diseases = lists[3];
  return ctx;
}

SupportingContext extract_supporting_context(std::string_view section_text, llm::LlmClient& client,
                                             const llm::TemplateSet& templates, std::string_view item) {
  if (trim(section_text).empty()) throw ArgumentError("supporting context needs non-empty text");
  const auto prompt = templates.get("tag").render({{"section", std::string(section_text)}});

  llm::CompletionRequest request;
  request.messages = prompt.messages;
  request.max_tokens = prompt.max_tokens.value_or(500);
  request.temperature = llm::kJudgeTemperature;
  request.purpose = "tag";
  request.item = std::string(item);
  const std::string first = client.complete(request);
  try {
    return parse_supporting_context(first);
  } catch (const ParseError& e) {
    spdlog::warn("tagging reply unreadable ({}); asking for a reformat", e.what());
  }

  const auto reformat = templates.get("tag_reformat").render({});
  request.messages.push_back({llm::Role::Assistant, first});
  for (const auto& m : reformat.messages) request.messages.push_back(m);
  request.request_id.clear();
  const std::string second = client.complete(request);
  return parse_supporting_context(second);
}

json to_json(const SupportingContext& c) {
  return {{"mentions_location", c.mentions_location},
          {"mentions_crop", c.mentions_crop},
          {"mentions_cattle", c.mentions_cattle},
          {"mentions_disease", c.mentions_disease},
          {"locations", c.locations},
          {"crops", c.crops},
          {"cattles", c.cattles},
          {"diseases", c.diseases}};
}

SupportingContext supporting_context_from_json(const json& j) {
  SupportingContext c;
  try {
    c.mentions_location = j.at("mentions_location").get<bool>();
    c.mentions_crop = j.at("mentions_crop").get<bool>();
    c.mentions_cattle = j.at("mentions_cattle").get<bool>();
    c.mentions_disease = j.at("mentions_disease").get<bool>();
    c.locations = j.at("locations").get<std::vector<std::string>>();
    c.crops = j.at("crops").get<std::vector<std::string>>();
    c.cattles = j.at("cattles").get<std::vector<std::string>>();
    c.diseases = j.at("diseases").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw SchemaError("supporting_context", e.what());
  }
  return c;
}

ContextMode region_context(std::string region) {
  if (trim(region).empty()) throw ArgumentError("context mode needs a non-empty region");
  return RegionContext{std::move(region)};
}

std::string mode_name(const ContextMode& mode) {
  switch (mode.index()) {
    case 0: return "no_context";
    case 1: return "context";
    default: return "external_context";
  }
}

ContextMode parse_mode_name(std::string_view name, std::string_view region, const SupportingContext* tags) {
  if (name == "no_context") return NoContext{};
  if (name == "context") return region_context(std::string(region));
  if (name == "external_context") return ExternalContext{tags ? *tags : SupportingContext{}};
  throw ArgumentError("unknown context mode: " + std::string(name));
}

std::string context_slot(const ContextMode& mode) {
  if (std::holds_alternative<NoContext>(mode)) return "{}";
  if (const auto* r = std::get_if<RegionContext>(&mode)) return json{{"location", r->region}}.dump();
  return to_json(std::get<ExternalContext>(mode).context).dump();
}

}  // namespace qagen::genesis
