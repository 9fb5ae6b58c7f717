#pragma once

#include <chrono>
#include <string>

#include "qagen/error.hpp"

namespace qagen::llm {

class BackendError : public Error {
 public:
  BackendError(const std::string& what, bool retryable) : Error(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

// Connection failures, timeouts and 5xx responses.
class TransportError : public BackendError {
 public:
  explicit TransportError(const std::string& what) : BackendError(what, true) {}
};

class RateLimitError : public TransportError {
 public:
  RateLimitError(const std::string& what, std::chrono::milliseconds retry_after)
      : TransportError(what), retry_after_(retry_after) {}
  std::chrono::milliseconds retry_after() const { return retry_after_; }

 private:
  std::chrono::milliseconds retry_after_;
};

class ProtocolError : public BackendError {
 public:
  explicit ProtocolError(const std::string& what) : BackendError(what, false) {}
};

class CacheMissError : public BackendError {
 public:
  CacheMissError(const std::string& what, std::string digest)
      : BackendError(what, false), digest_(std::move(digest)) {}
  const std::string& digest() const { return digest_; }

 private:
  std::string digest_;
};

class NetworkDisabledError : public BackendError {
 public:
  explicit NetworkDisabledError(const std::string& what) : BackendError(what, false) {}
};

}  // namespace qagen::llm
