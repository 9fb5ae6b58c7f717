#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "qagen/corpus/chunker.hpp"
#include "qagen/llm/http.hpp"

namespace qagen::pipeline {

// Where completions come from.
//   offline: built-in deterministic responder (no network)
//   replay:  fixtures only; a missing fixture is a backend error
//   record:  http, with every response stored as a fixture
//   http:    chat-completions endpoint
struct BackendSpec {
  std::string kind = "offline";
  std::filesystem::path fixtures_dir;
  llm::HttpConfig http;
  std::string model = "default";
  std::size_t max_in_flight = 4;
  int max_attempts = 3;
};

// hash | file | http
struct EmbedderSpec {
  std::string kind = "hash";
  std::size_t dims = 64;
  std::filesystem::path path;
  llm::HttpConfig http;
  std::string model;
};

// synthetic | file
struct WordVectorSpec {
  std::string kind = "synthetic";
  std::size_t dims = 16;
  std::filesystem::path path;
};

struct SubjectSpec {
  std::string label;
  bool fine_tuned = false;
  BackendSpec backend;
};

struct JudgeSpec {
  BackendSpec question_backend;
  BackendSpec eval_backend;
  std::vector<std::string> question_metrics{"relevance", "global_relevance", "coverage", "fluency"};
  std::vector<std::string> answer_metrics{"coherence", "answer_relevance", "groundedness"};
  std::vector<std::string> eval_metrics{"guideline", "succinctness", "correctness"};
  std::size_t trials = 5;
  std::size_t max_eval_items = 0;  // 0: every reference pair
  std::vector<SubjectSpec> subjects;
};

struct PipelineConfig {
  std::filesystem::path config_dir;  // relative paths resolve here
  std::filesystem::path corpus_manifest;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  corpus::ChunkingParams chunking;
  EmbedderSpec embedder;
  BackendSpec generation;
  std::filesystem::path templates_dir;
  std::filesystem::path examples_file;
  std::string context_mode = "external_context";
  bool combined = true;
  std::size_t k = 3;
  std::vector<std::size_t> recall_ks{1, 2, 3, 5, 10};
  std::vector<double> growth_factors{1.5, 2.0, 4.0, 6.8};
  double distractor_drop = 0.3;
  std::vector<std::string> metrics{"overlap", "diversity", "details"};
  double overlap_smoothing = 1.0;
  std::string kl_direction = "source||questions";
  WordVectorSpec word_vectors;
  JudgeSpec judge;
  double cluster_threshold = 0.90;
  std::size_t cluster_min_regions = 3;
  std::string finetune_source = "both";  // separated | combined | both
};

// Builds a config from JSON; unknown keys are a ConfigError. Relative paths
// resolve against `base_dir`.
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

// Reads the JSON file, applies "dotted.key=value" overrides (value parsed
// as JSON when it parses, else taken as a string), then builds the config.
PipelineConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

void apply_override(nlohmann::json& j, const std::string& assignment);

// Throws ConfigError on missing paths, k < 1, bad modes, unknown metrics.
void validate(const PipelineConfig& config);

nlohmann::json to_json(const BackendSpec& b);
nlohmann::json to_json(const EmbedderSpec& e);
nlohmann::json to_json(const WordVectorSpec& w);
nlohmann::json to_json(const PipelineConfig& c);

}  // namespace qagen::pipeline
