#pragma once

#include <chrono>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "qagen/llm/backend.hpp"

namespace qagen::llm {

struct CallLedgerEntry {
  std::string request_id;
  std::string purpose;
  std::size_t prompt_chars = 0;
  std::size_t completion_chars = 0;
  double latency_ms = 0.0;
  std::string backend;
  std::string outcome;  // ok | transport_error | rate_limited | protocol_error | cache_miss | ...
  int attempt = 1;
  std::string item;
};

// Append-only record of every completion attempt. Thread-safe. When a sink
// path is set each entry is also appended to that JSONL file.
class CallLedger {
 public:
  CallLedger() = default;
  explicit CallLedger(std::string sink_path);

  void append(CallLedgerEntry entry);
  std::vector<CallLedgerEntry> entries() const;
  std::size_t size() const;

  // Successful calls only.
  std::size_t calls() const;
  std::map<std::string, std::size_t> calls_by_purpose() const;
  std::size_t calls_for(const std::string& purpose) const;
  std::size_t prompt_chars() const;
  std::size_t completion_chars() const;

  void clear();
  void write_jsonl(std::ostream& out) const;

 private:
  mutable std::mutex mutex_;
  std::vector<CallLedgerEntry> entries_;
  std::string sink_path_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{30000};
};

// Front door for chat completions: validation, bounded in-flight calls,
// retries with exponential backoff (Retry-After honored), and the ledger.
class LlmClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  LlmClient(std::shared_ptr<ChatBackend> backend, std::shared_ptr<CallLedger> ledger = nullptr,
            RetryPolicy policy = {}, std::size_t max_in_flight = 4);

  // Fills in model_label (when empty) and request_id, then completes. Throws
  // the last BackendError when every attempt fails; non-retryable errors are
  // thrown after the first attempt. An empty completion is a ProtocolError.
  std::string complete(CompletionRequest request);

  void set_default_model(std::string model) { default_model_ = std::move(model); }
  const std::string& default_model() const { return default_model_; }
  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

  CallLedger& ledger() { return *ledger_; }
  std::shared_ptr<CallLedger> ledger_ptr() const { return ledger_; }
  ChatBackend& backend() { return *backend_; }
  std::size_t max_in_flight() const { return max_in_flight_; }

 private:
  std::shared_ptr<ChatBackend> backend_;
  std::shared_ptr<CallLedger> ledger_;
  RetryPolicy policy_;
  std::size_t max_in_flight_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
  std::string default_model_ = "default";
  Sleeper sleeper_;
  std::mutex id_mutex_;
  std::map<std::string, std::size_t> id_counters_;
};

}  // namespace qagen::llm
