#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "qagen/llm/backend.hpp"

namespace qagen::llm {

// Canonical form of the parts of a request that determine its completion:
// model label, messages (content whitespace-collapsed and trimmed),
// max_tokens and temperature, serialized with sorted keys.
std::string canonical_request(const CompletionRequest& request);

// Lowercase hex SHA-256 of canonical_request().
std::string request_digest(const CompletionRequest& request);

// Directory of recorded completions, one `<digest>.json` file per distinct
// request: {"digest", "request", "responses": [...]}. Repeated identical
// requests are answered with successive recorded responses (the last one
// repeats), which is how multi-trial judge runs replay.
class FixtureStore {
 public:
  explicit FixtureStore(std::filesystem::path dir);

  void record(const CompletionRequest& request, const std::string& response);
  // Throws CacheMissError when no fixture exists for the request.
  std::string load(const CompletionRequest& request);
  bool contains(const CompletionRequest& request) const;
  void reset_cursors();

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path file_for(const std::string& digest) const;

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::size_t> cursor_;
};

class ReplayBackend : public ChatBackend {
 public:
  explicit ReplayBackend(std::shared_ptr<FixtureStore> store);
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "replay"; }

 private:
  std::shared_ptr<FixtureStore> store_;
};

// Forwards to `inner` and records every successful completion.
class RecordingBackend : public ChatBackend {
 public:
  RecordingBackend(std::shared_ptr<ChatBackend> inner, std::shared_ptr<FixtureStore> store);
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "record(" + inner_->name() + ")"; }

 private:
  std::shared_ptr<ChatBackend> inner_;
  std::shared_ptr<FixtureStore> store_;
};

}  // namespace qagen::llm
