#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "qagen/llm/http.hpp"

#include <cstdlib>

#include "qagen/llm/errors.hpp"

namespace qagen::llm {

using nlohmann::json;

namespace {

void require_network(const std::string& what) {
  if (!network_enabled()) throw NetworkDisabledError(what + ": network access is disabled (offline profile)");
}

httplib::Headers build_headers(const HttpConfig& config) {
  httplib::Headers headers;
  for (const auto& [k, v] : config.headers) headers.emplace(k, v);
  if (!config.api_key_env.empty()) {
    if (const char* key = std::getenv(config.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  return headers;
}

std::chrono::milliseconds parse_retry_after(const httplib::Response& res) {
  if (!res.has_header("Retry-After")) return std::chrono::milliseconds{1000};
  try {
    return std::chrono::milliseconds{static_cast<long long>(std::stod(res.get_header_value("Retry-After")) * 1000)};
  } catch (const std::exception&) {
    return std::chrono::milliseconds{1000};
  }
}

std::string post_json(const HttpConfig& config, const std::string& path, const json& body) {
  httplib::Client cli(config.base_url);
  cli.set_connection_timeout(config.timeout);
  cli.set_read_timeout(config.timeout);
  cli.set_write_timeout(config.timeout);
  auto res = cli.Post(path, build_headers(config), body.dump(), "application/json");
  if (!res) {
    throw TransportError("request to " + config.base_url + path + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429) {
    throw RateLimitError("rate limited by " + config.base_url, parse_retry_after(*res));
  }
  if (res->status >= 500) {
    throw TransportError("server error " + std::to_string(res->status) + " from " + config.base_url + path);
  }
  if (res->status != 200) {
    throw ProtocolError("HTTP " + std::to_string(res->status) + " from " + config.base_url + path + ": " +
                        res->body.substr(0, 200));
  }
  return res->body;
}

}  // namespace

std::string parse_chat_response(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("chat response is not JSON: ") + e.what());
  }
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw ProtocolError("chat response content is not a string");
    return content.get<std::string>();
  } catch (const json::exception&) {
    throw ProtocolError("chat response lacks choices[0].message.content");
  }
}

HttpChatBackend::HttpChatBackend(HttpConfig config) : config_(std::move(config)) {}

std::string HttpChatBackend::complete(const CompletionRequest& request) {
  require_network("chat completion");
  return parse_chat_response(post_json(config_, config_.chat_path, to_wire_json(request)));
}

HttpEmbedder::HttpEmbedder(HttpConfig config, std::string model)
    : config_(std::move(config)), model_(std::move(model)) {}

EmbeddingVector HttpEmbedder::embed(std::string_view text) {
  require_network("embedding");
  const std::string body = post_json(config_, config_.embeddings_path, {{"model", model_}, {"input", text}});
  try {
    auto j = json::parse(body);
    return EmbeddingVector(j.at("data").at(0).at("embedding").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("embedding response lacks data[0].embedding: ") + e.what());
  }
}

}  // namespace qagen::llm
