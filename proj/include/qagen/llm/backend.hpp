#pragma once

#include <string>

#include "qagen/llm/types.hpp"

namespace qagen::llm {

// One chat-completion transport. Implementations must be safe to call from
// several threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

// Process-wide switch for every network-facing backend. Starts disabled when
// the QAGEN_OFFLINE environment variable is set to a non-empty value other
// than "0".
void set_network_enabled(bool enabled);
bool network_enabled();

}  // namespace qagen::llm
