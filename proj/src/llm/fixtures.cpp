#include "qagen/llm/fixtures.hpp"

#include <cstdio>
#include <fstream>

#include "qagen/digest.hpp"
#include "qagen/llm/errors.hpp"

namespace qagen::llm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string canonical_request(const CompletionRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"content", normalize_whitespace(m.content)}, {"role", role_name(m.role)}});
  }
  // Temperatures are compared at fixed precision so 0.7 and 0.70000000001
  // from different parsers agree.
  char temp[32];
  std::snprintf(temp, sizeof temp, "%.6f", request.temperature);
  json canon = {{"max_tokens", request.max_tokens},
                {"messages", std::move(messages)},
                {"model", request.model_label},
                {"temperature", temp}};
  return canon.dump();
}

std::string request_digest(const CompletionRequest& request) {
  return sha256_hex(canonical_request(request));
}

FixtureStore::FixtureStore(fs::path dir) : dir_(std::move(dir)) {}

fs::path FixtureStore::file_for(const std::string& digest) const { return dir_ / (digest + ".json"); }

void FixtureStore::record(const CompletionRequest& request, const std::string& response) {
  const std::string digest = request_digest(request);
  std::lock_guard lock(mutex_);
  fs::create_directories(dir_);
  const fs::path file = file_for(digest);
  json j;
  if (fs::exists(file)) {
    std::ifstream in(file);
    j = json::parse(in);
  } else {
    j = {{"digest", digest}, {"request", json::parse(canonical_request(request))}, {"responses", json::array()}};
  }
  j["responses"].push_back(response);
  std::ofstream out(file, std::ios::trunc);
  out << j.dump(2) << '\n';
}

std::string FixtureStore::load(const CompletionRequest& request) {
  const std::string digest = request_digest(request);
  std::lock_guard lock(mutex_);
  const fs::path file = file_for(digest);
  std::ifstream in(file);
  if (!in) throw CacheMissError("no fixture for request digest " + digest + " in " + dir_.string(), digest);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ProtocolError("corrupt fixture " + file.string() + ": " + e.what());
  }
  const auto& responses = j.at("responses");
  if (!responses.is_array() || responses.empty()) {
    throw CacheMissError("fixture " + file.string() + " has no responses", digest);
  }
  std::size_t& cursor = cursor_[digest];
  const std::size_t idx = std::min(cursor, responses.size() - 1);
  ++cursor;
  return responses[idx].get<std::string>();
}

bool FixtureStore::contains(const CompletionRequest& request) const {
  return fs::exists(file_for(request_digest(request)));
}

void FixtureStore::reset_cursors() {
  std::lock_guard lock(mutex_);
  cursor_.clear();
}

ReplayBackend::ReplayBackend(std::shared_ptr<FixtureStore> store) : store_(std::move(store)) {}

std::string ReplayBackend::complete(const CompletionRequest& request) { return store_->load(request); }

RecordingBackend::RecordingBackend(std::shared_ptr<ChatBackend> inner, std::shared_ptr<FixtureStore> store)
    : inner_(std::move(inner)), store_(std::move(store)) {}

std::string RecordingBackend::complete(const CompletionRequest& request) {
  std::string response = inner_->complete(request);
  store_->record(request, response);
  return response;
}

}  // namespace qagen::llm
