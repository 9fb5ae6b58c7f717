#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>

#include "qagen/llm/backend.hpp"
#include "qagen/llm/embedding.hpp"

namespace qagen::llm {

struct HttpConfig {
  std::string base_url = "http://localhost:8000";  // scheme://host[:port]
  std::string chat_path = "/v1/chat/completions";
  std::string embeddings_path = "/v1/embeddings";
  // Name of the environment variable holding the bearer token; empty means
  // no Authorization header.
  std::string api_key_env;
  std::chrono::seconds timeout{60};
  std::map<std::string, std::string> headers;
};

// Plain chat-completions client. One attempt per call: retry and rate-limit
// handling live in LlmClient.
class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(HttpConfig config);
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "http(" + config_.base_url + ")"; }

 private:
  HttpConfig config_;
};

// Embeddings endpoint: POST {model, input} -> {data: [{embedding: [...]}]}.
class HttpEmbedder : public Embedder {
 public:
  HttpEmbedder(HttpConfig config, std::string model);
  EmbeddingVector embed(std::string_view text) override;
  std::string name() const override { return "http-embed(" + model_ + ")"; }

 private:
  HttpConfig config_;
  std::string model_;
};

// Parses a chat-completions response body; throws ProtocolError on a body
// without choices[0].message.content.
std::string parse_chat_response(const std::string& body);

}  // namespace qagen::llm
