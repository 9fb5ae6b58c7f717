#include <atomic>
#include <functional>
#include <set>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qagen/llm/client.hpp"
#include "qagen/llm/embedding.hpp"
#include "qagen/llm/errors.hpp"
#include "qagen/llm/fixtures.hpp"
#include "qagen/llm/http.hpp"
#include "qagen/llm/prompt_template.hpp"
#include "qagen/llm/stub.hpp"
#include "qagen/parallel.hpp"

using namespace qagen;
using namespace qagen::llm;
namespace fs = std::filesystem;

namespace {

CompletionRequest user_request(std::string content, std::string purpose = "test") {
  CompletionRequest r;
  r.messages = {{Role::System, "be brief"}, {Role::User, std::move(content)}};
  r.purpose = std::move(purpose);
  return r;
}

// Fails with the given errors in order, then answers "done".
class FlakyBackend : public ChatBackend {
 public:
  explicit FlakyBackend(std::vector<std::function<void()>> failures) : failures_(std::move(failures)) {}
  std::string complete(const CompletionRequest&) override {
    const auto i = calls_++;
    if (i < failures_.size()) failures_[i]();
    return "done";
  }
  std::string name() const override { return "flaky"; }
  std::size_t calls() const { return calls_; }

 private:
  std::vector<std::function<void()>> failures_;
  std::atomic<std::size_t> calls_{0};
};

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("request validation and wire format") {
  CompletionRequest r;
  CHECK_THROWS_AS(validate(r), ArgumentError);
  r = user_request("hi");
  r.max_tokens = 0;
  CHECK_THROWS_AS(validate(r), ArgumentError);
  r.max_tokens = 12;
  r.model_label = "m";
  const auto wire = to_wire_json(r);
  CHECK(wire["model"] == "m");
  CHECK(wire["messages"][1]["role"] == "user");
  CHECK(wire["max_tokens"] == 12);
  const auto back = request_from_json(wire);
  CHECK(back.messages == r.messages);
  CHECK(back.temperature == r.temperature);
  CHECK(last_user_content(r) == "hi");
  CHECK_THROWS_AS(parse_role("robot"), ArgumentError);
}

TEST_CASE("stub backends") {
  auto echo = make_echo_stub();
  CHECK(echo->complete(user_request("say this")) == "say this");
  auto cyc = make_cycling_stub({"a", "b"});
  CHECK(cyc->complete(user_request("x")) == "a");
  CHECK(cyc->complete(user_request("y")) == "b");
  CHECK(cyc->complete(user_request("x")) == "a");
  CHECK(cyc->calls() == 3);
}

TEST_CASE("client fills defaults and records the call") {
  auto ledger = std::make_shared<CallLedger>();
  LlmClient client(make_echo_stub(), ledger);
  client.set_default_model("m0");
  auto r = user_request("ping", "genq");
  r.item = "doc:s0";
  CHECK(client.complete(r) == "ping");
  CHECK(client.complete(r) == "ping");
  const auto entries = ledger->entries();
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].request_id == "genq-0");
  CHECK(entries[1].request_id == "genq-1");
  CHECK(entries[0].item == "doc:s0");
  CHECK(entries[0].prompt_chars == std::string("be brief").size() + 4);
  CHECK(entries[0].completion_chars == 4);
  CHECK(entries[0].outcome == "ok");
  CHECK(ledger->calls_for("genq") == 2);
}

TEST_CASE("transport errors retry with exponential backoff") {
  auto flaky = std::make_shared<FlakyBackend>(std::vector<std::function<void()>>{
      [] { throw TransportError("down"); }, [] { throw TransportError("down"); }});
  LlmClient client(flaky, nullptr, RetryPolicy{3, std::chrono::milliseconds{500}, 2.0, std::chrono::milliseconds{30000}});
  std::vector<long long> waits;
  client.set_sleeper([&](std::chrono::milliseconds d) { waits.push_back(d.count()); });
  CHECK(client.complete(user_request("x")) == "done");
  CHECK(waits == std::vector<long long>{500, 1000});
  const auto e = client.ledger().entries();
  REQUIRE(e.size() == 3);
  CHECK(e[0].outcome == "transport_error");
  CHECK(e[1].attempt == 2);
  CHECK(e[2].outcome == "ok");
  CHECK(client.ledger().calls() == 1);
}

TEST_CASE("retries stop after max attempts") {
  auto always = std::make_shared<StubBackend>("down", [](const CompletionRequest&) -> std::string {
    throw TransportError("connection refused");
  });
  LlmClient client(always);
  int sleeps = 0;
  client.set_sleeper([&](std::chrono::milliseconds) { ++sleeps; });
  try {
    client.complete(user_request("x"));
    FAIL("expected TransportError");
  } catch (const BackendError& e) {
    CHECK(e.retryable());
  }
  CHECK(always->calls() == 3);
  CHECK(sleeps == 2);
  CHECK(client.ledger().calls() == 0);
  CHECK(client.ledger().size() == 3);
}

TEST_CASE("rate limits honor Retry-After") {
  auto flaky = std::make_shared<FlakyBackend>(std::vector<std::function<void()>>{
      [] { throw RateLimitError("slow down", std::chrono::milliseconds{4000}); }});
  LlmClient client(flaky);
  std::vector<long long> waits;
  client.set_sleeper([&](std::chrono::milliseconds d) { waits.push_back(d.count()); });
  CHECK(client.complete(user_request("x")) == "done");
  CHECK(waits == std::vector<long long>{4000});
  CHECK(client.ledger().entries()[0].outcome == "rate_limited");
}

TEST_CASE("non-retryable errors are thrown at once") {
  auto flaky = std::make_shared<FlakyBackend>(std::vector<std::function<void()>>{
      [] { throw ProtocolError("bad body"); }});
  LlmClient client(flaky);
  client.set_sleeper([](std::chrono::milliseconds) { FAIL("no sleep expected"); });
  CHECK_THROWS_AS(client.complete(user_request("x")), ProtocolError);
  CHECK(flaky->calls() == 1);

  LlmClient empty(make_fixed_stub(""));
  CHECK_THROWS_AS(empty.complete(user_request("x")), ProtocolError);
}

TEST_CASE("ledger totals are conserved under concurrency") {
  auto ledger = std::make_shared<CallLedger>();
  LlmClient client(make_echo_stub(), ledger, {}, 3);
  constexpr std::size_t n = 400;
  std::atomic<std::size_t> expected_prompt{0}, expected_completion{0};
  parallel_for(n, 8, [&](std::size_t i) {
    auto r = user_request(std::string(i % 17 + 1, 'x'), i % 2 ? "odd" : "even");
    expected_prompt += 8 + r.messages[1].content.size();
    expected_completion += r.messages[1].content.size();
    client.complete(r);
  });
  CHECK(ledger->calls() == n);
  CHECK(ledger->calls_for("odd") == n / 2);
  CHECK(ledger->calls_for("even") == n / 2);
  CHECK(ledger->prompt_chars() == expected_prompt.load());
  CHECK(ledger->completion_chars() == expected_completion.load());
  std::set<std::string> ids;
  for (const auto& e : ledger->entries()) ids.insert(e.request_id);
  CHECK(ids.size() == n);
}

TEST_CASE("ledger sink appends JSONL") {
  TempDir dir("qagen_ledger_sink");
  const auto path = (dir.path / "calls.jsonl").string();
  CallLedger ledger(path);
  ledger.append({"r1", "genq", 10, 5, 1.0, "stub", "ok", 1, "a"});
  ledger.append({"r2", "gena", 3, 0, 1.0, "stub", "transport_error", 1, "b"});
  std::ifstream in(path);
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(in, line)) rows.push_back(nlohmann::json::parse(line));
  REQUIRE(rows.size() == 2);
  CHECK(rows[1]["outcome"] == "transport_error");
  CHECK(rows[0]["item"] == "a");
  CHECK(ledger.calls() == 1);
}

TEST_CASE("request digest ignores field order and bookkeeping") {
  const auto a = nlohmann::json::parse(
      R"({"model":"m","messages":[{"role":"user","content":"What  is\nsoil?"}],"max_tokens":50,"temperature":0})");
  const auto b = nlohmann::json::parse(
      R"({"temperature":0,"max_tokens":50,"messages":[{"content":" What is soil? ","role":"user"}],"model":"m"})");
  auto ra = request_from_json(a), rb = request_from_json(b);
  rb.request_id = "other";
  rb.purpose = "gena";
  rb.item = "x";
  CHECK(request_digest(ra) == request_digest(rb));
  CHECK(request_digest(ra).size() == 64);
  rb.temperature = 0.7;
  CHECK(request_digest(ra) != request_digest(rb));
  rb = ra;
  rb.model_label = "n";
  CHECK(request_digest(ra) != request_digest(rb));
}

TEST_CASE("fixture record, load and replay") {
  TempDir dir("qagen_fixture_test");
  auto store = std::make_shared<FixtureStore>(dir.path);
  const auto req = user_request("question one");
  CHECK_FALSE(store->contains(req));
  CHECK_THROWS_AS(store->load(req), CacheMissError);

  store->record(req, "first\nanswer");
  store->record(req, "second");
  CHECK(store->contains(req));
  CHECK(store->load(req) == "first\nanswer");
  CHECK(store->load(req) == "second");
  CHECK(store->load(req) == "second");
  store->reset_cursors();

  ReplayBackend replay(std::make_shared<FixtureStore>(dir.path));
  CHECK(replay.complete(req) == "first\nanswer");
  try {
    replay.complete(user_request("never recorded"));
    FAIL("expected CacheMissError");
  } catch (const CacheMissError& e) {
    CHECK(e.digest() == request_digest(user_request("never recorded")));
  }
}

TEST_CASE("recording backend stores what it forwards") {
  TempDir dir("qagen_record_test");
  auto store = std::make_shared<FixtureStore>(dir.path);
  RecordingBackend rec(make_echo_stub(), store);
  CHECK(rec.complete(user_request("echo me")) == "echo me");
  CHECK(FixtureStore(dir.path).load(user_request("echo me")) == "echo me");
}

TEST_CASE("network switch blocks the HTTP backends") {
  const bool before = network_enabled();
  set_network_enabled(false);
  HttpConfig cfg;
  cfg.base_url = "http://127.0.0.1:9";
  HttpChatBackend http(cfg);
  CHECK_THROWS_AS(http.complete(user_request("x")), NetworkDisabledError);
  HttpEmbedder emb(cfg, "e");
  CHECK_THROWS_AS(emb.embed("x"), NetworkDisabledError);

  LlmClient client(std::make_shared<HttpChatBackend>(cfg));
  CHECK_THROWS_AS(client.complete(user_request("x")), NetworkDisabledError);
  CHECK(client.ledger().size() == 1);
  CHECK(client.ledger().entries()[0].outcome == "network_disabled");
  set_network_enabled(before);
}

TEST_CASE("chat response parsing") {
  CHECK(parse_chat_response(R"({"choices":[{"message":{"role":"assistant","content":"hi"}}]})") == "hi");
  CHECK_THROWS_AS(parse_chat_response("nope"), ProtocolError);
  CHECK_THROWS_AS(parse_chat_response(R"({"choices":[]})"), ProtocolError);
}

TEST_CASE("embedders") {
  HashEmbedder hash(24, 1);
  CHECK(embed_text("same text", hash) == embed_text("same text", hash));
  CHECK(embed_text("Same, text!", hash) == embed_text("same text", hash));
  CHECK_THROWS_AS(embed_text("", hash), ArgumentError);

  TempDir dir("qagen_file_embedder");
  const auto path = dir.path / "vecs.jsonl";
  FileEmbedder::write(path, {{"alpha", {1, 2, 2}}, {"beta", {0, 1, 0}}});
  FileEmbedder file(path);
  const auto v = embed_text("alpha", file);
  CHECK(v.values == std::vector<double>{1, 2, 2});
  CHECK(v.norm == doctest::Approx(3.0));
  CHECK_THROWS_AS(file.embed("gamma"), CacheMissError);
}

TEST_CASE("prompt template rendering") {
  const auto t = PromptTemplate::parse(
      "{{#system~}}\nYou write {{what}}.\n{{~/system}}\n{{#user~}}\nText: {section}\n{{~/user}}\n"
      "{{#assistant~}}\n{{gen 'out' max_tokens=321}}\n{{~/assistant}}\n",
      "t");
  CHECK(t.slots() == std::set<std::string>{"section", "what"});
  CHECK(t.max_tokens() == 321);
  const auto r = t.render({{"what", "questions"}, {"section", "{not a slot}"}});
  REQUIRE(r.messages.size() == 2);
  CHECK(r.messages[0] == ChatMessage{Role::System, "You write questions."});
  CHECK(r.messages[1] == ChatMessage{Role::User, "Text: {not a slot}"});
  CHECK(r.max_tokens == 321);
  CHECK_THROWS_AS(t.render({{"what", "x"}}), ArgumentError);
}

TEST_CASE("prompt template comments and errors") {
  const auto plain = PromptTemplate::parse("{{! note for editors }}\nHello {{name}}{{! inline }}!");
  const auto r = plain.render({{"name", "Ana"}});
  REQUIRE(r.messages.size() == 1);
  CHECK(r.messages[0] == ChatMessage{Role::User, "Hello Ana!"});
  CHECK(plain.slots() == std::set<std::string>{"name"});

  CHECK_THROWS_AS(PromptTemplate::parse("{{#user~}} open"), ParseError);
  CHECK_THROWS_AS(PromptTemplate::parse("{{#user~}}a{{~/user}} stray {{#user~}}b{{~/user}}"), ParseError);
}

TEST_CASE("template set overrides from a directory") {
  TempDir dir("qagen_templates");
  TemplateSet set;
  set.add("greet", "Hi {{name}}");
  std::ofstream(dir.path / "greet.tmpl") << "Hello {{name}}";
  std::ofstream(dir.path / "extra.tmpl") << "{{x}}";
  std::ofstream(dir.path / "ignored.txt") << "{{y}}";
  set.load_directory(dir.path);
  CHECK(set.source("greet") == "Hello {{name}}");
  CHECK(set.get("greet").render({{"name", "Bo"}}).messages[0].content == "Hello Bo");
  CHECK(set.ids() == std::vector<std::string>{"extra", "greet"});
  CHECK_THROWS_AS(set.get("missing"), ArgumentError);
}
