#include "qagen/llm/client.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <thread>

#include "json.hpp"
#include "qagen/llm/errors.hpp"

namespace qagen::llm {

using nlohmann::json;

namespace {

json entry_json(const CallLedgerEntry& e) {
  return {{"request_id", e.request_id}, {"purpose", e.purpose},
          {"prompt_chars", e.prompt_chars}, {"completion_chars", e.completion_chars},
          {"latency_ms", e.latency_ms}, {"backend", e.backend},
          {"outcome", e.outcome}, {"attempt", e.attempt}, {"item", e.item}};
}

std::size_t prompt_size(const CompletionRequest& r) {
  std::size_t n = 0;
  for (const auto& m : r.messages) n += m.content.size();
  return n;
}

}  // namespace

CallLedger::CallLedger(std::string sink_path) : sink_path_(std::move(sink_path)) {}

void CallLedger::append(CallLedgerEntry entry) {
  std::lock_guard lock(mutex_);
  if (!sink_path_.empty()) {
    std::ofstream out(sink_path_, std::ios::app);
    out << entry_json(entry).dump() << '\n';
  }
  entries_.push_back(std::move(entry));
}

std::vector<CallLedgerEntry> CallLedger::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::size_t CallLedger::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::size_t CallLedger::calls() const {
  std::lock_guard lock(mutex_);
  return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(),
                                                [](const auto& e) { return e.outcome == "ok"; }));
}

std::map<std::string, std::size_t> CallLedger::calls_by_purpose() const {
  std::lock_guard lock(mutex_);
  std::map<std::string, std::size_t> out;
  for (const auto& e : entries_) {
    if (e.outcome == "ok") ++out[e.purpose];
  }
  return out;
}

std::size_t CallLedger::calls_for(const std::string& purpose) const {
  auto by = calls_by_purpose();
  auto it = by.find(purpose);
  return it == by.end() ? 0 : it->second;
}

std::size_t CallLedger::prompt_chars() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.prompt_chars;
  return n;
}

std::size_t CallLedger::completion_chars() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.completion_chars;
  return n;
}

void CallLedger::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
}

void CallLedger::write_jsonl(std::ostream& out) const {
  std::lock_guard lock(mutex_);
  for (const auto& e : entries_) out << entry_json(e).dump() << '\n';
}

LlmClient::LlmClient(std::shared_ptr<ChatBackend> backend, std::shared_ptr<CallLedger> ledger,
                     RetryPolicy policy, std::size_t max_in_flight)
    : backend_(std::move(backend)),
      ledger_(ledger ? std::move(ledger) : std::make_shared<CallLedger>()),
      policy_(policy),
      max_in_flight_(std::max<std::size_t>(1, max_in_flight)),
      slots_(std::make_unique<std::counting_semaphore<>>(static_cast<std::ptrdiff_t>(max_in_flight_))),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (policy_.max_attempts < 1) policy_.max_attempts = 1;
}

std::string LlmClient::complete(CompletionRequest request) {
  if (request.model_label.empty()) request.model_label = default_model_;
  if (request.purpose.empty()) request.purpose = "completion";
  if (request.request_id.empty()) {
    std::lock_guard lock(id_mutex_);
    request.request_id = request.purpose + "-" + std::to_string(id_counters_[request.purpose]++);
  }
  validate(request);

  const std::size_t prompt_chars = prompt_size(request);
  auto delay = policy_.base_delay;
  for (int attempt = 1;; ++attempt) {
    CallLedgerEntry entry{request.request_id, request.purpose, prompt_chars, 0, 0.0, backend_->name(), "ok", attempt, request.item};
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    };
    std::chrono::milliseconds wait{0};
    try {
      slots_->acquire();
      std::string completion;
      try {
        completion = backend_->complete(request);
      } catch (...) {
        slots_->release();
        throw;
      }
      slots_->release();
      if (completion.empty()) throw ProtocolError("backend returned an empty completion");
      entry.completion_chars = completion.size();
      entry.latency_ms = elapsed();
      ledger_->append(entry);
      return completion;
    } catch (const RateLimitError& e) {
      entry.outcome = "rate_limited";
      entry.latency_ms = elapsed();
      ledger_->append(entry);
      if (attempt >= policy_.max_attempts) throw;
      wait = std::max(e.retry_after(), delay);
    } catch (const BackendError& e) {
      entry.outcome = dynamic_cast<const TransportError*>(&e) ? "transport_error"
                      : dynamic_cast<const CacheMissError*>(&e) ? "cache_miss"
                      : dynamic_cast<const NetworkDisabledError*>(&e) ? "network_disabled"
                                                                      : "protocol_error";
      entry.latency_ms = elapsed();
      ledger_->append(entry);
      if (!e.retryable() || attempt >= policy_.max_attempts) throw;
      wait = delay;
    } catch (const std::exception&) {
      entry.outcome = "error";
      entry.latency_ms = elapsed();
      ledger_->append(entry);
      throw;
    }
    sleeper_(std::min(wait, policy_.max_delay));
    delay = std::chrono::milliseconds{static_cast<long long>(static_cast<double>(delay.count()) * policy_.multiplier)};
  }
}

}  // namespace qagen::llm
