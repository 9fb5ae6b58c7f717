#include "qagen/llm/prompt_template.hpp"

#include <cctype>
#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "qagen/error.hpp"

namespace qagen::llm {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string_view trim_left(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  return s;
}

std::string_view trim_right(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool all_space(std::string_view s) { return trim_left(s).empty(); }

// Length of an identifier slot starting at text[pos] ('{'), 0 when none.
// Sets `name`. Accepts {{ name }} and {name}.
std::size_t match_slot(std::string_view text, std::size_t pos, std::string& name) {
  const bool dbl = text.substr(pos, 2) == "{{";
  std::size_t i = pos + (dbl ? 2 : 1);
  while (dbl && i < text.size() && text[i] == ' ') ++i;
  if (i >= text.size() || !is_ident_start(text[i])) return 0;
  const std::size_t start = i;
  while (i < text.size() && is_ident(text[i])) ++i;
  const std::size_t end = i;
  while (dbl && i < text.size() && text[i] == ' ') ++i;
  if (dbl) {
    if (text.substr(i, 2) != "}}") return 0;
    i += 2;
  } else {
    if (i >= text.size() || text[i] != '}') return 0;
    ++i;
  }
  name.assign(text.substr(start, end - start));
  return i - pos;
}

// Drops {{! ... }} comments, together with the line break after a comment
// that sits on a line of its own.
std::string strip_comments(std::string_view text) {
  static const std::regex comment_re(R"((^|\n)[ \t]*\{\{![^}]*\}\}[ \t]*(?=\n|$)\n?|\{\{![^}]*\}\})");
  const std::string s(text);
  return std::regex_replace(s, comment_re, "$1");
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string_view text, std::string id) {
  PromptTemplate t;
  t.id_ = std::move(id);

  static const std::regex open_re(R"(\{\{#(system|user|assistant)(~?)\}\})");
  static const std::regex close_re(R"(\{\{(~?)/(system|user|assistant)\}\})");
  static const std::regex gen_re(R"(\{\{gen\s+'[^']*'((?:\s+\w+=[^\s}]+)*)\s*\}\})");
  static const std::regex max_re(R"(max_tokens=(\d+))");

  struct RawBlock {
    Role role;
    std::string body;
  };
  std::vector<RawBlock> raw_blocks;

  const std::string s = strip_comments(text);
  text = s;
  std::smatch open;
  auto cursor = s.cbegin();
  bool any_block = false;
  while (std::regex_search(cursor, s.cend(), open, open_re)) {
    any_block = true;
    const std::string_view before(&*cursor, static_cast<std::size_t>(open[0].first - cursor));
    if (!all_space(before))
      throw ParseError("template " + t.id_ + ": text outside role blocks",
                       static_cast<std::size_t>(cursor - s.cbegin()));
    const std::string role = open[1].str();
    const bool trim_after_open = open[2].length() > 0;
    auto body_begin = open[0].second;
    std::smatch close;
    if (!std::regex_search(body_begin, s.cend(), close, close_re) || close[2].str() != role)
      throw ParseError("template " + t.id_ + ": unterminated {{#" + role + "}} block",
                       static_cast<std::size_t>(open[0].first - s.cbegin()));
    std::string_view body(&*body_begin, static_cast<std::size_t>(close[0].first - body_begin));
    if (trim_after_open) body = trim_left(body);
    if (close[1].length() > 0) body = trim_right(body);
    raw_blocks.push_back({parse_role(role), std::string(body)});
    cursor = close[0].second;
  }
  if (any_block) {
    if (!all_space(std::string_view(&*cursor, static_cast<std::size_t>(s.cend() - cursor))))
      throw ParseError("template " + t.id_ + ": text after the last role block",
                       static_cast<std::size_t>(cursor - s.cbegin()));
  } else {
    raw_blocks.push_back({Role::User, std::string(trim_right(text))});
  }

  for (auto& rb : raw_blocks) {
    if (rb.role == Role::Assistant) {
      std::smatch gen;
      if (std::regex_search(rb.body, gen, gen_re)) {
        std::smatch mt;
        const std::string opts = gen[1].str();
        if (std::regex_search(opts, mt, max_re)) t.max_tokens_ = std::stoi(mt[1].str());
        rb.body = std::string(trim_right(std::string_view(rb.body).substr(0, gen.position(0))));
      }
      if (all_space(rb.body)) continue;
    }
    Block block;
    block.role = rb.role;
    std::string literal;
    const std::string_view body = rb.body;
    for (std::size_t i = 0; i < body.size();) {
      std::string name;
      const std::size_t len = body[i] == '{' ? match_slot(body, i, name) : 0;
      if (len == 0) {
        literal.push_back(body[i++]);
        continue;
      }
      if (!literal.empty()) block.segments.push_back({false, std::move(literal)});
      literal.clear();
      block.segments.push_back({true, name});
      t.slots_.insert(name);
      i += len;
    }
    if (!literal.empty()) block.segments.push_back({false, std::move(literal)});
    t.blocks_.push_back(std::move(block));
  }
  return t;
}

RenderedPrompt PromptTemplate::render(const SlotValues& values) const {
  RenderedPrompt out;
  out.max_tokens = max_tokens_;
  for (const auto& block : blocks_) {
    std::string content;
    for (const auto& seg : block.segments) {
      if (!seg.is_slot) {
        content += seg.text;
        continue;
      }
      auto it = values.find(seg.text);
      if (it == values.end()) throw ArgumentError("template " + id_ + ": no value for slot '" + seg.text + "'");
      content += it->second;
    }
    out.messages.push_back({block.role, std::move(content)});
  }
  return out;
}

void TemplateSet::add(const std::string& id, std::string_view text) {
  templates_.insert_or_assign(id, PromptTemplate::parse(text, id));
  sources_.insert_or_assign(id, std::string(text));
}

const std::string& TemplateSet::source(std::string_view id) const {
  auto it = sources_.find(id);
  if (it == sources_.end()) throw ArgumentError("unknown prompt template: " + std::string(id));
  return it->second;
}

const PromptTemplate& TemplateSet::get(std::string_view id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw ArgumentError("unknown prompt template: " + std::string(id));
  return it->second;
}

std::vector<std::string> TemplateSet::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : templates_) out.push_back(id);
  return out;
}

void TemplateSet::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ArgumentError("template directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".tmpl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    add(path.stem().string(), buf.str());
  }
}

}  // namespace qagen::llm
