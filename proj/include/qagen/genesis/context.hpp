#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qagen/llm/client.hpp"
#include "qagen/llm/prompt_template.hpp"

namespace qagen::genesis {

struct SupportingContext {
  bool mentions_location = false;
  bool mentions_crop = false;
  bool mentions_cattle = false;
  bool mentions_disease = false;
  std::vector<std::string> locations;
  std::vector<std::string> crops;
  std::vector<std::string> cattles;
  std::vector<std::string> diseases;

  bool operator==(const SupportingContext&) const = default;
};

nlohmann::json to_json(const SupportingContext& ctx);
SupportingContext supporting_context_from_json(const nlohmann::json& j);

// Parses the eight answers (four Yes/No, then four bracketed lists) of a
// tagging completion. A "No" empties the matching list. Throws ParseError
// carrying the raw text when either group is incomplete.
SupportingContext parse_supporting_context(std::string_view completion);

// Items of a python-style list literal: quotes optional, trimmed, de-duplicated.
std::vector<std::string> parse_list_literal(std::string_view literal);

// One tagging call; on a parse failure, one follow-up call asking for a
// strict reformat. Templates "tag" and "tag_reformat".
SupportingContext extract_supporting_context(std::string_view section_text, llm::LlmClient& client,
                                             const llm::TemplateSet& templates, std::string_view item = {});

struct NoContext {
  bool operator==(const NoContext&) const = default;
};
struct RegionContext {
  std::string region;
  bool operator==(const RegionContext&) const = default;
};
struct ExternalContext {
  SupportingContext context;
  bool operator==(const ExternalContext&) const = default;
};
using ContextMode = std::variant<NoContext, RegionContext, ExternalContext>;

// Throws ArgumentError for an empty region.
ContextMode region_context(std::string region);

// "no_context", "context", "external_context"
std::string mode_name(const ContextMode& mode);
ContextMode parse_mode_name(std::string_view name, std::string_view region = {},
                            const SupportingContext* tags = nullptr);

// Compact JSON for the {{context}} slot: {}, {"location": region}, or the tags.
std::string context_slot(const ContextMode& mode);

}  // namespace qagen::genesis
