#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qagen/llm/client.hpp"
#include "qagen/llm/embedding.hpp"
#include "qagen/pipeline/config.hpp"

namespace qagen::pipeline {

// Completion marker of one stage: stages/<stage>.json in the run directory.
struct StageArtifact {
  std::string stage;
  std::map<std::string, std::string> input_digests;
  std::vector<std::string> outputs;  // relative to the run directory
  bool complete = false;

  bool operator==(const StageArtifact&) const = default;
};

nlohmann::json to_json(const StageArtifact& a);
StageArtifact artifact_from_json(const nlohmann::json& j);

// Hex SHA-256 of a file's bytes; empty for a missing file.
std::string file_digest(const std::filesystem::path& path);

// ingest chunk index tag genq gena metrics judge recall ablate export-ft report
const std::vector<std::string>& stage_names();

enum class StageStatus { Ran, Skipped };

struct StageResult {
  std::string stage;
  StageStatus status = StageStatus::Ran;
  std::vector<std::string> outputs;
};

using BackendFactory = std::function<std::shared_ptr<llm::ChatBackend>(const BackendSpec&)>;

// offline / replay / record / http backend for a spec.
std::shared_ptr<llm::ChatBackend> make_backend(const BackendSpec& spec);
std::unique_ptr<llm::Embedder> make_embedder(const EmbedderSpec& spec, std::uint64_t seed);

// Writes every built-in generation and judge template to <dir>/<id>.tmpl.
// All but "tag" and "question" start with a "reconstructed" comment line.
// Returns the ids written.
std::vector<std::string> write_default_templates(const std::filesystem::path& dir);

struct PipelineOptions {
  bool force = false;             // rerun stages whose marker is current
  BackendFactory backend_factory;  // defaults to make_backend
};

// Runs stages against the run directory (config.output_dir). A stage runs
// when forced, when its marker is absent or incomplete, when any recorded
// input digest differs, or when one of its outputs is missing; otherwise it
// is skipped. A missing upstream output is a DependencyError naming the
// command that produces it.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config, PipelineOptions options = {});
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  StageResult run(std::string_view stage);
  std::vector<StageResult> run_all();

  const std::filesystem::path& run_dir() const { return config_.output_dir; }
  const PipelineConfig& config() const { return config_; }
  // Every completion attempt made by this instance; also appended to logs/calls.jsonl.
  llm::CallLedger& ledger() { return *ledger_; }

 private:
  struct Impl;

  PipelineConfig config_;
  PipelineOptions options_;
  std::shared_ptr<llm::CallLedger> ledger_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qagen::pipeline
