#include "qagen/llm/stub.hpp"

#include "qagen/error.hpp"

namespace qagen::llm {

StubBackend::StubBackend(std::string name, Responder responder)
    : name_(std::move(name)), responder_(std::move(responder)) {}

std::string StubBackend::complete(const CompletionRequest& request) {
  calls_.fetch_add(1);
  return responder_(request);
}

std::shared_ptr<StubBackend> make_echo_stub() {
  return std::make_shared<StubBackend>("stub:echo", [](const CompletionRequest& r) {
    return last_user_content(r);
  });
}

std::shared_ptr<StubBackend> make_fixed_stub(std::string response) {
  return std::make_shared<StubBackend>(
      "stub:fixed", [response = std::move(response)](const CompletionRequest&) { return response; });
}

std::shared_ptr<StubBackend> make_cycling_stub(std::vector<std::string> responses) {
  if (responses.empty()) throw ArgumentError("cycling stub needs at least one response");
  auto counter = std::make_shared<std::atomic<std::size_t>>(0);
  return std::make_shared<StubBackend>(
      "stub:cycle", [responses = std::move(responses), counter](const CompletionRequest&) {
        return responses[counter->fetch_add(1) % responses.size()];
      });
}

}  // namespace qagen::llm
