#include <atomic>
#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "doctest.h"
#include "qagen/llm/client.hpp"
#include "qagen/llm/errors.hpp"
#include "qagen/llm/http.hpp"

using namespace qagen::llm;

namespace {

// Local chat-completions server. /flaky fails twice with 503 before answering.
class LocalServer {
 public:
  LocalServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_auth_ = req.get_header_value("Authorization");
      const auto body = nlohmann::json::parse(req.body);
      const std::string content = body["messages"].back()["content"];
      nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "echo: " + content}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    server_.Post("/flaky", [this](const httplib::Request&, httplib::Response& res) {
      if (flaky_calls_++ < 2) {
        res.status = 503;
        return;
      }
      res.set_content(R"({"choices":[{"message":{"content":"recovered"}}]})", "application/json");
    });
    server_.Post("/limited", [](const httplib::Request&, httplib::Response& res) {
      res.status = 429;
      res.set_header("Retry-After", "2");
    });
    server_.Post("/not-json", [](const httplib::Request&, httplib::Response& res) { res.set_content("<html>", "text/html"); });
    server_.Post("/forbidden", [](const httplib::Request&, httplib::Response& res) { res.status = 403; });
    server_.Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      const double n = static_cast<double>(body["input"].get<std::string>().size());
      res.set_content(nlohmann::json{{"data", {{{"embedding", {n, 1.0}}}}}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }

  HttpConfig config(const std::string& chat_path = "/v1/chat/completions") const {
    HttpConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_);
    c.chat_path = chat_path;
    c.timeout = std::chrono::seconds{5};
    return c;
  }
  std::string last_auth() const { return last_auth_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> flaky_calls_{0};
  std::string last_auth_;
};

CompletionRequest request(const std::string& content) {
  CompletionRequest r;
  r.model_label = "m";
  r.messages = {{Role::User, content}};
  return r;
}

}  // namespace

TEST_CASE("HTTP chat backend round trip with bearer token") {
  set_network_enabled(true);
  LocalServer server;
  auto cfg = server.config();
  setenv("QAGEN_TEST_KEY", "sekret", 1);
  cfg.api_key_env = "QAGEN_TEST_KEY";
  HttpChatBackend http(cfg);
  CHECK(http.complete(request("hello")) == "echo: hello");
  CHECK(server.last_auth() == "Bearer sekret");
}

TEST_CASE("5xx responses are retried by the client") {
  set_network_enabled(true);
  LocalServer server;
  LlmClient client(std::make_shared<HttpChatBackend>(server.config("/flaky")));
  int sleeps = 0;
  client.set_sleeper([&](std::chrono::milliseconds) { ++sleeps; });
  CHECK(client.complete(request("x")) == "recovered");
  CHECK(sleeps == 2);
  CHECK(client.ledger().size() == 3);
}

TEST_CASE("HTTP error mapping") {
  set_network_enabled(true);
  LocalServer server;
  try {
    HttpChatBackend(server.config("/limited")).complete(request("x"));
    FAIL("expected RateLimitError");
  } catch (const RateLimitError& e) {
    CHECK(e.retry_after() == std::chrono::milliseconds{2000});
  }
  CHECK_THROWS_AS(HttpChatBackend(server.config("/not-json")).complete(request("x")), ProtocolError);
  CHECK_THROWS_AS(HttpChatBackend(server.config("/forbidden")).complete(request("x")), ProtocolError);
}

TEST_CASE("unreachable endpoint fails retryably after three attempts") {
  set_network_enabled(true);
  HttpConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";
  cfg.timeout = std::chrono::seconds{2};
  LlmClient client(std::make_shared<HttpChatBackend>(cfg));
  client.set_sleeper([](std::chrono::milliseconds) {});
  try {
    client.complete(request("x"));
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(e.retryable());
  }
  CHECK(client.ledger().size() == 3);
}

TEST_CASE("HTTP embedder") {
  set_network_enabled(true);
  LocalServer server;
  HttpEmbedder emb(server.config(), "embed-model");
  const auto v = emb.embed("abcd");
  CHECK(v.values == std::vector<double>{4.0, 1.0});
}
