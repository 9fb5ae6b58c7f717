#include "qagen/pipeline/config.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "qagen/judge/judges.hpp"
#include "qagen/judge/verdict.hpp"
#include "qagen/pipeline/errors.hpp"

namespace qagen::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Typed access to one JSON object that rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }
  ~Section() = default;

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_[key].is_null()) return;
    try {
      out = j_[key].get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  void path(const char* key, fs::path& out, const fs::path& base) {
    std::string s;
    get(key, s);
    if (!s.empty()) out = resolve(s, base);
  }

  std::optional<Section> child(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key) || j_[key].is_null()) return std::nullopt;
    return Section(j_[key], where_ + "." + key);
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_[key] : nullptr;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) throw ConfigError("unknown config key " + where_ + "." + key);
  }

  static fs::path resolve(const std::string& s, const fs::path& base) {
    fs::path p(s);
    return p.is_absolute() ? p : (base / p).lexically_normal();
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void read_http(Section& s, llm::HttpConfig& http) {
  s.get("base_url", http.base_url);
  s.get("chat_path", http.chat_path);
  s.get("embeddings_path", http.embeddings_path);
  s.get("api_key_env", http.api_key_env);
  long timeout = static_cast<long>(http.timeout.count());
  s.get("timeout_seconds", timeout);
  http.timeout = std::chrono::seconds(timeout);
  std::map<std::string, std::string> headers;
  s.get("headers", headers);
  if (!headers.empty()) http.headers = headers;
}

BackendSpec read_backend(Section s, const fs::path& base, BackendSpec b = {}) {
  s.get("kind", b.kind);
  s.path("fixtures_dir", b.fixtures_dir, base);
  s.get("model", b.model);
  s.get("max_in_flight", b.max_in_flight);
  s.get("max_attempts", b.max_attempts);
  read_http(s, b.http);
  s.finish();
  return b;
}

json http_json(const llm::HttpConfig& h) {
  return {{"base_url", h.base_url},
          {"chat_path", h.chat_path},
          {"embeddings_path", h.embeddings_path},
          {"api_key_env", h.api_key_env},
          {"timeout_seconds", h.timeout.count()},
          {"headers", h.headers}};
}

const std::set<std::string> kBackendKinds{"offline", "replay", "record", "http"};

void check_backend(const BackendSpec& b, const std::string& where) {
  if (!kBackendKinds.count(b.kind)) throw ConfigError(where + ".kind: unknown backend kind '" + b.kind + "'");
  if ((b.kind == "replay" || b.kind == "record") && b.fixtures_dir.empty())
    throw ConfigError(where + ": " + b.kind + " backend needs fixtures_dir");
  if (b.kind == "replay" && !fs::is_directory(b.fixtures_dir))
    throw ConfigError(where + ": fixtures_dir does not exist: " + b.fixtures_dir.string());
  if (b.max_in_flight == 0) throw ConfigError(where + ".max_in_flight must be >= 1");
  if (b.max_attempts < 1) throw ConfigError(where + ".max_attempts must be >= 1");
  if (b.model.empty()) throw ConfigError(where + ".model must be non-empty");
}

void check_metric_tier(const std::vector<std::string>& names, judge::MetricTier tier, const std::string& where) {
  for (const auto& n : names) {
    try {
      if (judge::metric_spec(n).tier != tier) throw ConfigError(where + ": metric '" + n + "' belongs elsewhere");
    } catch (const ArgumentError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
}

}  // namespace

PipelineConfig config_from_json(const json& j, const fs::path& base_dir) {
  PipelineConfig c;
  c.config_dir = base_dir;
  Section root(j, "config");
  root.path("corpus_manifest", c.corpus_manifest, base_dir);
  root.path("output_dir", c.output_dir, base_dir);
  root.get("seed", c.seed);
  if (auto s = root.child("chunking")) {
    s->get("chunk_tokens", c.chunking.chunk_tokens);
    s->get("overlap_tokens", c.chunking.overlap_tokens);
    s->finish();
  }
  if (auto s = root.child("embedder")) {
    s->get("kind", c.embedder.kind);
    s->get("dims", c.embedder.dims);
    s->path("path", c.embedder.path, base_dir);
    s->get("model", c.embedder.model);
    read_http(*s, c.embedder.http);
    s->finish();
  }
  if (auto s = root.child("generation")) {
    if (auto b = s->child("backend")) c.generation = read_backend(*b, base_dir);
    s->path("templates_dir", c.templates_dir, base_dir);
    s->path("examples_file", c.examples_file, base_dir);
    s->get("context_mode", c.context_mode);
    s->get("combined", c.combined);
    s->finish();
  }
  if (auto s = root.child("retrieval")) {
    s->get("k", c.k);
    s->get("recall_ks", c.recall_ks);
    s->get("growth_factors", c.growth_factors);
    s->get("distractor_drop", c.distractor_drop);
    s->finish();
  }
  if (auto s = root.child("metrics")) {
    s->get("enabled", c.metrics);
    s->get("overlap_smoothing", c.overlap_smoothing);
    s->get("kl_direction", c.kl_direction);
    if (auto w = s->child("word_vectors")) {
      w->get("kind", c.word_vectors.kind);
      w->get("dims", c.word_vectors.dims);
      w->path("path", c.word_vectors.path, base_dir);
      w->finish();
    }
    s->finish();
  }
  c.judge.question_backend = c.generation;
  c.judge.question_backend.model = judge::kQuestionJudgeModel;
  c.judge.eval_backend = c.generation;
  c.judge.eval_backend.model = judge::kEvalJudgeModel;
  if (auto s = root.child("judge")) {
    if (auto b = s->child("question_backend")) c.judge.question_backend = read_backend(*b, base_dir, c.judge.question_backend);
    if (auto b = s->child("eval_backend")) c.judge.eval_backend = read_backend(*b, base_dir, c.judge.eval_backend);
    s->get("question_metrics", c.judge.question_metrics);
    s->get("answer_metrics", c.judge.answer_metrics);
    s->get("eval_metrics", c.judge.eval_metrics);
    s->get("trials", c.judge.trials);
    s->get("max_eval_items", c.judge.max_eval_items);
    if (const json* subjects = s->raw("subjects")) {
      if (!subjects->is_array()) throw ConfigError("config.judge.subjects must be an array");
      for (std::size_t i = 0; i < subjects->size(); ++i) {
        Section sub((*subjects)[i], "config.judge.subjects[" + std::to_string(i) + "]");
        SubjectSpec spec;
        sub.get("label", spec.label);
        sub.get("fine_tuned", spec.fine_tuned);
        spec.backend = c.generation;
        if (auto b = sub.child("backend")) spec.backend = read_backend(*b, base_dir, c.generation);
        if (spec.label.empty()) spec.label = spec.backend.model;
        sub.finish();
        c.judge.subjects.push_back(std::move(spec));
      }
    }
    s->finish();
  }
  if (c.judge.subjects.empty()) c.judge.subjects.push_back({c.generation.model, false, c.generation});
  if (auto s = root.child("cross_region")) {
    s->get("threshold", c.cluster_threshold);
    s->get("min_regions", c.cluster_min_regions);
    s->finish();
  }
  if (auto s = root.child("finetune")) {
    s->get("source", c.finetune_source);
    s->finish();
  }
  root.finish();
  return c;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key.path=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("empty path component in override: " + assignment);
    if (!node->is_object()) throw ConfigError("override path crosses a non-object: " + key);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

PipelineConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  for (const auto& o : overrides) apply_override(j, o);
  auto base = fs::absolute(path).parent_path();
  return config_from_json(j, base);
}

void validate(const PipelineConfig& c) {
  if (c.corpus_manifest.empty()) throw ConfigError("corpus_manifest is required");
  if (!fs::is_regular_file(c.corpus_manifest))
    throw ConfigError("corpus_manifest not found: " + c.corpus_manifest.string());
  if (c.output_dir.empty()) throw ConfigError("output_dir is required");
  if (c.chunking.chunk_tokens < 1 || c.chunking.overlap_tokens >= c.chunking.chunk_tokens)
    throw ConfigError("chunking needs chunk_tokens >= 1 and overlap_tokens < chunk_tokens");
  if (c.k < 1) throw ConfigError("retrieval.k must be >= 1");
  for (auto k : c.recall_ks)
    if (k < 1) throw ConfigError("retrieval.recall_ks entries must be >= 1");
  double prev = 1.0;
  for (double f : c.growth_factors) {
    if (!(f > prev)) throw ConfigError("retrieval.growth_factors must be increasing and > 1");
    prev = f;
  }
  if (!(c.distractor_drop >= 0.0 && c.distractor_drop < 1.0))
    throw ConfigError("retrieval.distractor_drop must be in [0, 1)");
  static const std::set<std::string> modes{"no_context", "context", "external_context"};
  if (!modes.count(c.context_mode)) throw ConfigError("unknown generation.context_mode '" + c.context_mode + "'");
  static const std::set<std::string> metric_names{"overlap", "diversity", "details"};
  for (const auto& m : c.metrics)
    if (!metric_names.count(m)) throw ConfigError("unknown metrics.enabled entry '" + m + "'");
  if (!(c.overlap_smoothing > 0.0)) throw ConfigError("metrics.overlap_smoothing must be > 0");
  if (c.kl_direction != "source||questions" && c.kl_direction != "questions||source")
    throw ConfigError("metrics.kl_direction must be source||questions or questions||source");
  if (c.word_vectors.kind == "file") {
    if (!fs::is_regular_file(c.word_vectors.path))
      throw ConfigError("metrics.word_vectors.path not found: " + c.word_vectors.path.string());
  } else if (c.word_vectors.kind != "synthetic" || c.word_vectors.dims == 0) {
    throw ConfigError("metrics.word_vectors must be synthetic (dims >= 1) or file");
  }
  if (c.embedder.kind == "file") {
    if (!fs::is_regular_file(c.embedder.path)) throw ConfigError("embedder.path not found: " + c.embedder.path.string());
  } else if (c.embedder.kind == "hash") {
    if (c.embedder.dims == 0) throw ConfigError("embedder.dims must be >= 1");
  } else if (c.embedder.kind != "http") {
    throw ConfigError("unknown embedder.kind '" + c.embedder.kind + "'");
  }
  if (!c.templates_dir.empty() && !fs::is_directory(c.templates_dir))
    throw ConfigError("generation.templates_dir not found: " + c.templates_dir.string());
  if (!c.examples_file.empty() && !fs::is_regular_file(c.examples_file))
    throw ConfigError("generation.examples_file not found: " + c.examples_file.string());
  check_backend(c.generation, "generation.backend");
  check_backend(c.judge.question_backend, "judge.question_backend");
  check_backend(c.judge.eval_backend, "judge.eval_backend");
  for (const auto& s : c.judge.subjects) check_backend(s.backend, "judge.subjects[" + s.label + "]");
  check_metric_tier(c.judge.question_metrics, judge::MetricTier::Question, "judge.question_metrics");
  check_metric_tier(c.judge.answer_metrics, judge::MetricTier::Answer, "judge.answer_metrics");
  check_metric_tier(c.judge.eval_metrics, judge::MetricTier::ModelEval, "judge.eval_metrics");
  if (c.judge.trials < 1) throw ConfigError("judge.trials must be >= 1");
  if (!(c.cluster_threshold > 0.0 && c.cluster_threshold <= 1.0))
    throw ConfigError("cross_region.threshold must be in (0, 1]");
  if (c.cluster_min_regions < 2) throw ConfigError("cross_region.min_regions must be >= 2");
  if (c.finetune_source != "separated" && c.finetune_source != "combined" && c.finetune_source != "both")
    throw ConfigError("finetune.source must be separated, combined or both");
}

json to_json(const BackendSpec& b) {
  json j = http_json(b.http);
  j.update({{"kind", b.kind},
            {"fixtures_dir", b.fixtures_dir.string()},
            {"model", b.model},
            {"max_in_flight", b.max_in_flight},
            {"max_attempts", b.max_attempts}});
  return j;
}

json to_json(const EmbedderSpec& e) {
  json j = http_json(e.http);
  j.update({{"kind", e.kind}, {"dims", e.dims}, {"path", e.path.string()}, {"model", e.model}});
  return j;
}

json to_json(const WordVectorSpec& w) { return {{"kind", w.kind}, {"dims", w.dims}, {"path", w.path.string()}}; }

json to_json(const PipelineConfig& c) {
  json subjects = json::array();
  for (const auto& s : c.judge.subjects)
    subjects.push_back({{"label", s.label}, {"fine_tuned", s.fine_tuned}, {"backend", to_json(s.backend)}});
  return {{"corpus_manifest", c.corpus_manifest.string()},
          {"output_dir", c.output_dir.string()},
          {"seed", c.seed},
          {"chunking", {{"chunk_tokens", c.chunking.chunk_tokens}, {"overlap_tokens", c.chunking.overlap_tokens}}},
          {"embedder", to_json(c.embedder)},
          {"generation",
           {{"backend", to_json(c.generation)},
            {"templates_dir", c.templates_dir.string()},
            {"examples_file", c.examples_file.string()},
            {"context_mode", c.context_mode},
            {"combined", c.combined}}},
          {"retrieval",
           {{"k", c.k},
            {"recall_ks", c.recall_ks},
            {"growth_factors", c.growth_factors},
            {"distractor_drop", c.distractor_drop}}},
          {"metrics",
           {{"enabled", c.metrics},
            {"overlap_smoothing", c.overlap_smoothing},
            {"kl_direction", c.kl_direction},
            {"word_vectors", to_json(c.word_vectors)}}},
          {"judge",
           {{"question_backend", to_json(c.judge.question_backend)},
            {"eval_backend", to_json(c.judge.eval_backend)},
            {"question_metrics", c.judge.question_metrics},
            {"answer_metrics", c.judge.answer_metrics},
            {"eval_metrics", c.judge.eval_metrics},
            {"trials", c.judge.trials},
            {"max_eval_items", c.judge.max_eval_items},
            {"subjects", subjects}}},
          {"cross_region", {{"threshold", c.cluster_threshold}, {"min_regions", c.cluster_min_regions}}},
          {"finetune", {{"source", c.finetune_source}}}};
}

}  // namespace qagen::pipeline
