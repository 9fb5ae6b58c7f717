#include <spdlog/spdlog.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qagen/llm/backend.hpp"
#include "qagen/llm/errors.hpp"
#include "qagen/pipeline/config.hpp"
#include "qagen/pipeline/errors.hpp"
#include "qagen/pipeline/pipeline.hpp"
#include "qagen/pipeline/report_tables.hpp"

namespace fs = std::filesystem;
namespace qp = qagen::pipeline;

namespace {

struct Options {
  std::string config = "qagen.json";
  std::vector<std::string> overrides;
  bool force = false;
  bool offline = false;
  std::string log_level = "info";
  std::string run_dir;
  std::string templates_out;
};

int run_verb(const std::string& verb, const Options& opt) {
  if (verb == "templates") {
    for (const auto& id : qp::write_default_templates(opt.templates_out))
      std::printf("%s\n", (fs::path(opt.templates_out) / (id + ".tmpl")).c_str());
    return qp::kExitOk;
  }
  if (verb == "report" && !opt.run_dir.empty()) {
    const auto bundle = qp::build_report_bundle(opt.run_dir);
    qp::write_report_bundle(bundle, fs::path(opt.run_dir) / "report");
    std::printf("report written to %s\n", (fs::path(opt.run_dir) / "report").c_str());
    return qp::kExitOk;
  }
  auto config = qp::load_config(opt.config, opt.overrides);
  qp::validate(config);
  if (verb == "validate") {
    std::printf("%s\n", qp::to_json(config).dump(2).c_str());
    return qp::kExitOk;
  }
  qp::Pipeline pipeline(std::move(config), {opt.force, {}});
  std::vector<qp::StageResult> results;
  if (verb == "run")
    results = pipeline.run_all();
  else
    results.push_back(pipeline.run(verb));
  for (const auto& r : results)
    std::printf("%-10s %s\n", r.stage.c_str(), r.status == qp::StageStatus::Ran ? "ran" : "skipped");
  std::printf("calls: %zu\n", pipeline.ledger().calls());
  return qp::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Question/answer generation and evaluation pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("-c,--config", opt.config, "Pipeline config file (JSON)");
  app.add_option("--set", opt.overrides, "Override a config key: dotted.key=value")->take_all();
  app.add_flag("-f,--force", opt.force, "Rerun stages even when their inputs are unchanged");
  app.add_flag("--offline", opt.offline, "Refuse every network call");
  app.add_option("--log-level", opt.log_level, "trace, debug, info, warn, error")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  std::vector<std::string> verbs = qp::stage_names();
  verbs.push_back("run");
  verbs.push_back("validate");
  verbs.push_back("templates");
  for (const auto& v : verbs) {
    auto* sub = app.add_subcommand(v, v == "run"        ? "Run every stage in order"
                                      : v == "validate" ? "Check the config and print it resolved"
                                      : v == "templates" ? "Write the built-in prompt templates as editable files"
                                                        : "Run the " + v + " stage");
    if (v == "report") sub->add_option("--run-dir", opt.run_dir, "Report on this run directory without a config");
    if (v == "templates") sub->add_option("--out", opt.templates_out, "Destination directory")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? qp::kExitOk : qp::kExitConfig;
  }

  spdlog::set_level(spdlog::level::from_str(opt.log_level));
  if (opt.offline) qagen::llm::set_network_enabled(false);
  const std::string verb = app.get_subcommands().front()->get_name();

  try {
    return run_verb(verb, opt);
  } catch (const qp::ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return qp::kExitConfig;
  } catch (const qp::DependencyError& e) {
    spdlog::error("{}", e.what());
    return qp::kExitDependency;
  } catch (const qagen::llm::BackendError& e) {
    spdlog::error("backend: {}", e.what());
    return qp::kExitBackend;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}
