#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace qagen::llm {

enum class Role { System, User, Assistant };

std::string_view role_name(Role role);
Role parse_role(std::string_view name);  // throws ArgumentError

struct ChatMessage {
  Role role = Role::User;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct CompletionRequest {
  std::string model_label;
  std::vector<ChatMessage> messages;
  int max_tokens = 2000;
  double temperature = 0.7;
  std::string request_id;
  // Ledger tag ("tag", "genq", "gena", "combined", "judge:<metric>", ...).
  std::string purpose;
  // What the call is about (section or QA id), copied to the ledger.
  std::string item;
};

inline constexpr double kJudgeTemperature = 0.0;
inline constexpr double kGenerationTemperature = 0.7;

// Throws ArgumentError unless there is at least one message and max_tokens >= 1.
void validate(const CompletionRequest& request);

// Chat-completions wire body: {model, messages:[{role, content}], max_tokens, temperature}.
nlohmann::json to_wire_json(const CompletionRequest& request);
CompletionRequest request_from_json(const nlohmann::json& j);

// Content of the last user message, or "" when there is none.
std::string last_user_content(const CompletionRequest& request);

}  // namespace qagen::llm
