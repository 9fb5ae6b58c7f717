#include "qagen/llm/types.hpp"

#include <atomic>
#include <cstdlib>

#include "qagen/error.hpp"
#include "qagen/llm/backend.hpp"

namespace qagen::llm {

using nlohmann::json;

std::string_view role_name(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

Role parse_role(std::string_view name) {
  if (name == "system") return Role::System;
  if (name == "user") return Role::User;
  if (name == "assistant") return Role::Assistant;
  throw ArgumentError("unknown chat role: " + std::string(name));
}

void validate(const CompletionRequest& request) {
  if (request.messages.empty()) throw ArgumentError("completion request has no messages");
  if (request.max_tokens < 1) throw ArgumentError("max_tokens must be >= 1");
}

json to_wire_json(const CompletionRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
  }
  return {{"model", request.model_label},
          {"messages", std::move(messages)},
          {"max_tokens", request.max_tokens},
          {"temperature", request.temperature}};
}

CompletionRequest request_from_json(const json& j) {
  CompletionRequest r;
  try {
    r.model_label = j.value("model", std::string{});
    for (const auto& m : j.at("messages")) {
      r.messages.push_back({parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
    }
    r.max_tokens = j.value("max_tokens", 2000);
    r.temperature = j.value("temperature", kGenerationTemperature);
    r.request_id = j.value("request_id", std::string{});
    r.purpose = j.value("purpose", std::string{});
    r.item = j.value("item", std::string{});
  } catch (const json::exception& e) {
    throw SchemaError("request", std::string("invalid completion request: ") + e.what());
  }
  return r;
}

std::string last_user_content(const CompletionRequest& request) {
  for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
    if (it->role == Role::User) return it->content;
  }
  return {};
}

namespace {

bool offline_from_env() {
  const char* v = std::getenv("QAGEN_OFFLINE");
  return v != nullptr && *v != '\0' && std::string_view(v) != "0";
}

std::atomic<bool>& network_flag() {
  static std::atomic<bool> flag{!offline_from_env()};
  return flag;
}

}  // namespace

void set_network_enabled(bool enabled) { network_flag().store(enabled); }
bool network_enabled() { return network_flag().load(); }

}  // namespace qagen::llm
