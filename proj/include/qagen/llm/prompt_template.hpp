#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qagen/llm/types.hpp"

namespace qagen::llm {

struct RenderedPrompt {
  std::vector<ChatMessage> messages;
  std::optional<int> max_tokens;  // from a {{gen ... max_tokens=N}} directive
};

using SlotValues = std::map<std::string, std::string, std::less<>>;

// Role blocks {{#system~}} ... {{~/system}} (also user, assistant), where a
// '~' trims the whitespace on its side of the tag. Slots are {{name}} or
// {name}. Text without role blocks renders as one user message. Inside an
// assistant block, {{gen 'x' max_tokens=N}} marks where the completion goes;
// an assistant block holding nothing else emits no message. {{! ... }} is a
// comment and renders as nothing.
class PromptTemplate {
 public:
  PromptTemplate() = default;

  // Throws ParseError on unbalanced blocks or stray text between blocks.
  static PromptTemplate parse(std::string_view text, std::string id = {});

  // Slot values are inserted verbatim. A missing slot is an ArgumentError.
  RenderedPrompt render(const SlotValues& values) const;

  const std::string& id() const { return id_; }
  const std::set<std::string>& slots() const { return slots_; }
  std::optional<int> max_tokens() const { return max_tokens_; }

 private:
  struct Segment {
    bool is_slot = false;
    std::string text;
  };
  struct Block {
    Role role = Role::User;
    std::vector<Segment> segments;
  };

  std::string id_;
  std::vector<Block> blocks_;
  std::set<std::string> slots_;
  std::optional<int> max_tokens_;
};

// Named templates: built-in defaults, overridable by <id>.tmpl files.
class TemplateSet {
 public:
  void add(const std::string& id, std::string_view text);
  bool contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }
  const PromptTemplate& get(std::string_view id) const;  // throws ArgumentError
  std::vector<std::string> ids() const;
  // Text the template was parsed from.
  const std::string& source(std::string_view id) const;

  // Every <id>.tmpl in `dir` replaces (or adds) template <id>.
  void load_directory(const std::filesystem::path& dir);

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
  std::map<std::string, std::string, std::less<>> sources_;
};

}  // namespace qagen::llm
