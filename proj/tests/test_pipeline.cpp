#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "qagen/judge/judges.hpp"
#include "qagen/llm/backend.hpp"
#include "qagen/llm/fixtures.hpp"
#include "qagen/pipeline/config.hpp"
#include "qagen/pipeline/errors.hpp"
#include "qagen/pipeline/offline.hpp"
#include "qagen/pipeline/pipeline.hpp"
#include "qagen/pipeline/report_tables.hpp"
#include "report_oracle.hpp"

using namespace qagen;
using namespace qagen::pipeline;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kData = QAGEN_DATA_DIR;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("qagen_pipeline_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

json mini_json() {
  std::ifstream in(kData / "mini_offline.json");
  return json::parse(in);
}

PipelineConfig mini_config(const fs::path& out, json j = mini_json()) {
  j["output_dir"] = out.string();
  return config_from_json(j, kData);
}

// Relative path -> bytes for every file outside logs/ (and optionally stages/).
std::map<std::string, std::string> snapshot(const fs::path& dir, bool with_stages = true) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).generic_string();
    if (rel.rfind("logs/", 0) == 0) continue;
    if (!with_stages && rel.rfind("stages/", 0) == 0) continue;
    out[rel] = report_oracle::slurp(e.path());
  }
  return out;
}

}  // namespace

TEST_CASE("config loading") {
  const auto c = load_config(kData / "mini_offline.json", {"retrieval.k=5", "seed=11"});
  CHECK(c.k == 5);
  CHECK(c.seed == 11);
  CHECK(c.corpus_manifest.is_absolute());
  CHECK(c.judge.subjects.size() == 2);
  CHECK(c.judge.subjects[1].fine_tuned);
  CHECK_NOTHROW(validate(c));
  CHECK(config_from_json(to_json(c), kData).k == 5);

  auto j = mini_json();
  j["retrieval"]["kk"] = 3;
  CHECK_THROWS_AS(config_from_json(j, kData), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"colour", 1}}, kData), ConfigError);
  CHECK_THROWS_AS(load_config(kData / "absent.json"), ConfigError);
  CHECK_THROWS_AS(load_config(kData / "mini_offline.json", {"=3"}), ConfigError);

  CHECK_THROWS_AS(validate(load_config(kData / "mini_offline.json", {"retrieval.k=0"})), ConfigError);
  CHECK_THROWS_AS(validate(load_config(kData / "mini_offline.json", {"generation.context_mode=vague"})), ConfigError);
  CHECK_THROWS_AS(validate(load_config(kData / "mini_offline.json", {"retrieval.growth_factors=[2,1.5]"})),
                  ConfigError);
  CHECK_THROWS_AS(validate(load_config(kData / "mini_offline.json", {"generation.backend.kind=replay"})), ConfigError);

  json doc{{"a", {{"b", 1}}}};
  apply_override(doc, "a.c=text");
  apply_override(doc, "a.b=[1,2]");
  CHECK(doc["a"]["c"] == "text");
  CHECK(doc["a"]["b"] == json::array({1, 2}));
}

TEST_CASE("stages refuse to run before their inputs exist") {
  TempDir dir("dep");
  Pipeline p(mini_config(dir.path));
  CHECK_THROWS_AS(p.run("gena"), DependencyError);
  CHECK_THROWS_AS(p.run("chunk"), DependencyError);
  CHECK_THROWS_AS(p.run("compile"), ArgumentError);
  CHECK(p.run("ingest").status == StageStatus::Ran);
  CHECK(p.run("chunk").status == StageStatus::Ran);
  CHECK_THROWS_AS(p.run("gena"), DependencyError);
}

TEST_CASE("offline run is idempotent and deterministic") {
  TempDir a("det_a"), b("det_b");
  std::vector<StageResult> first;
  {
    Pipeline p(mini_config(a.path));
    first = p.run_all();
    REQUIRE(first.size() == stage_names().size());
    for (const auto& r : first) CHECK(r.status == StageStatus::Ran);
    for (const auto& r : p.run_all()) CHECK(r.status == StageStatus::Skipped);
  }
  {
    Pipeline p(mini_config(b.path));
    p.run_all();
  }
  const auto sa = snapshot(a.path), sb = snapshot(b.path);
  CHECK(sa.size() == sb.size());
  for (const auto& [rel, bytes] : sa) {
    CAPTURE(rel);
    REQUIRE(sb.count(rel));
    CHECK(bytes == sb.at(rel));
  }

  SUBCASE("every report number recomputes from the stage files") {
    const auto problems = report_oracle::check(a.path);
    for (const auto& p : problems) MESSAGE(p);
    CHECK(problems.empty());
  }
  SUBCASE("a changed input reruns its stage and dependents only") {
    Pipeline p(mini_config(a.path, [] {
      auto j = mini_json();
      j["retrieval"]["recall_ks"] = json::array({1, 4});
      return j;
    }()));
    std::map<std::string, StageStatus> st;
    for (const auto& r : p.run_all()) st[r.stage] = r.status;
    CHECK(st["ingest"] == StageStatus::Skipped);
    CHECK(st["genq"] == StageStatus::Skipped);
    CHECK(st["recall"] == StageStatus::Ran);
    CHECK(st["report"] == StageStatus::Ran);
    CHECK(report_oracle::check(a.path).empty());
  }
  SUBCASE("a deleted output reruns its stage") {
    fs::remove(a.path / "recall.csv");
    Pipeline p(mini_config(a.path));
    CHECK(p.run("recall").status == StageStatus::Ran);
    CHECK(report_oracle::slurp(a.path / "recall.csv") == sa.at("recall.csv"));
  }
}

TEST_CASE("recorded fixtures replay the same run") {
  TempDir rec("rec"), rep("rep"), fixtures("fixtures");
  {
    PipelineOptions opt;
    opt.backend_factory = [&](const BackendSpec& spec) -> std::shared_ptr<llm::ChatBackend> {
      return std::make_shared<llm::RecordingBackend>(make_backend(spec),
                                                      std::make_shared<llm::FixtureStore>(fixtures.path));
    };
    Pipeline p(mini_config(rec.path), opt);
    p.run_all();
  }
  auto j = mini_json();
  const json replay{{"kind", "replay"}, {"fixtures_dir", fixtures.path.string()}};
  for (auto* b : {&j["generation"]["backend"], &j["judge"]["question_backend"], &j["judge"]["eval_backend"]})
    b->update(replay);
  for (auto& s : j["judge"]["subjects"]) s["backend"].update(replay);
  const auto cfg = mini_config(rep.path, j);
  CHECK_NOTHROW(validate(cfg));
  {
    llm::set_network_enabled(false);
    Pipeline p(cfg);
    p.run_all();
    for (const auto& e : p.ledger().entries()) CHECK(e.outcome == "ok");
  }
  const auto a = snapshot(rec.path, false), b = snapshot(rep.path, false);
  CHECK(a.size() == b.size());
  for (const auto& [rel, bytes] : a) {
    CAPTURE(rel);
    CHECK(b.count(rel));
    if (b.count(rel)) CHECK(bytes == b.at(rel));
  }
}

TEST_CASE("report on an empty run directory") {
  TempDir dir("empty");
  const auto bundle = build_report_bundle(dir.path);
  CHECK(bundle.questions.empty());
  CHECK(bundle.judge.rows.empty());
  write_report_bundle(bundle, dir.path / "report");
  const auto rows = report_oracle::csv_rows(dir.path / "report/question_metrics.csv");
  CHECK(rows.empty());
  CHECK(report_oracle::slurp(dir.path / "report/judge_report.csv") ==
        "model,fine_tuned,metric,rag,items,value,stddev,pass_fraction\n");
  CHECK(fs::exists(dir.path / "report/report.md"));
}

TEST_CASE("default templates are written as editable files") {
  TempDir dir("tmpl");
  const auto ids = write_default_templates(dir.path);
  CHECK(ids.size() >= 10);
  llm::TemplateSet reloaded;
  reloaded.load_directory(dir.path);
  CHECK(reloaded.ids() == [&] {
    auto s = ids;
    std::sort(s.begin(), s.end());
    return s;
  }());
  for (const auto& id : ids) CHECK(fs::is_regular_file(dir.path / (id + ".tmpl")));
  const auto judges = judge::default_judge_templates();
  for (const auto& id : judges.ids()) CHECK(reloaded.get(id).slots() == judges.get(id).slots());
}

TEST_CASE("offline responder judges by content") {
  llm::LlmClient client(make_offline_backend());
  const auto templates = judge::default_judge_templates();
  judge::JudgeEnv env{&client, &templates, judge::kEvalJudgeModel};
  const auto g = judge::make_guideline("When are samples taken?", "Samples are taken before spring planting.", env);
  CHECK(judge::score_with_guideline("Samples are taken before spring planting.", g, env).score == 1.0);
  CHECK(judge::score_with_guideline("", g, env).score == 0.0);
  CHECK(judge::rate_correctness("", "Samples are taken before spring planting.", env).grade ==
        judge::Grade::Incorrect);
  CHECK(judge::rate_correctness("Samples are taken before spring planting.", "Samples are taken before spring planting.",
                                env)
            .grade == judge::Grade::Correct);
}
