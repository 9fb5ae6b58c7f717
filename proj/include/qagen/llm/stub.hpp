#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qagen/llm/backend.hpp"

namespace qagen::llm {

using Responder = std::function<std::string(const CompletionRequest&)>;

// Deterministic in-process backend driven by a responder function.
class StubBackend : public ChatBackend {
 public:
  StubBackend(std::string name, Responder responder);

  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return name_; }
  std::size_t calls() const { return calls_.load(); }

 private:
  std::string name_;
  Responder responder_;
  std::atomic<std::size_t> calls_{0};
};

// Returns the last user message verbatim.
std::shared_ptr<StubBackend> make_echo_stub();
std::shared_ptr<StubBackend> make_fixed_stub(std::string response);
// Returns responses[i % n] for the i-th call, across all requests.
std::shared_ptr<StubBackend> make_cycling_stub(std::vector<std::string> responses);

}  // namespace qagen::llm
