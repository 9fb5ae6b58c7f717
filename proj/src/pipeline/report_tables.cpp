#include "qagen/pipeline/report_tables.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "qagen/judge/variance.hpp"

namespace qagen::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt2(const std::optional<double>& v) {
  if (!v) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

std::string md_cell(const std::optional<double>& v) { return v ? fmt2(v) : "-"; }

std::optional<double> mean_opt(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  return judge::mean_of(xs);
}

// metric -> item -> parsed trial scores
using ItemScores = std::map<std::string, std::map<std::string, std::vector<double>>>;

ItemScores item_scores(std::span<const judge::JudgeVerdict> verdicts) {
  ItemScores out;
  for (const auto& v : verdicts)
    if (v.parse_ok && !v.fine_tuned) out[v.metric_name][v.item_id].push_back(v.score);
  return out;
}

std::optional<double> mean_of_item_means(const ItemScores& s, const std::string& metric,
                                         const std::vector<std::string>& items) {
  const auto m = s.find(metric);
  if (m == s.end()) return std::nullopt;
  std::vector<double> means;
  for (const auto& id : items) {
    const auto it = m->second.find(id);
    if (it != m->second.end() && !it->second.empty()) means.push_back(judge::mean_of(it->second));
  }
  return mean_opt(means);
}

std::vector<json> read_jsonl_if(const fs::path& path) {
  std::vector<json> rows;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos) rows.push_back(json::parse(line));
  return rows;
}

std::vector<genesis::QAPair> read_pairs_if(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return {};
  return genesis::read_qa_jsonl(in);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) out.push_back(cur);
  return out;
}

}  // namespace

std::vector<QuestionMetricsRow> question_metrics_table(std::span<const genesis::QAPair> pairs,
                                                       std::span<const textmetrics::MetricRecord> metrics,
                                                       std::span<const judge::JudgeVerdict> verdicts) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::vector<std::string>> items;
  for (const auto& p : pairs)
    items[{p.model_label, p.context_mode, std::string(genesis::generation_name(p.generation))}].push_back(p.qa_id);

  std::map<Key, std::vector<double>> diversity, overlap, size;
  for (const auto& r : metrics) {
    const auto& prm = r.parameters;
    const Key k{prm.value("model_label", ""), prm.value("context_mode", ""), prm.value("generation", "")};
    if (r.metric == "diversity") diversity[k].push_back(r.value);
    else if (r.metric == "overlap") overlap[k].push_back(r.value);
    else if (r.metric == "details") size[k].push_back(r.value);
  }

  const auto scores = item_scores(verdicts);
  std::vector<QuestionMetricsRow> rows;
  for (const auto& [k, ids] : items) {
    QuestionMetricsRow row;
    std::tie(row.model, row.context, row.generation) = k;
    row.pairs = ids.size();
    row.coverage = mean_of_item_means(scores, "coverage", ids);
    row.relevance = mean_of_item_means(scores, "relevance", ids);
    row.global_relevance = mean_of_item_means(scores, "global_relevance", ids);
    row.fluency = mean_of_item_means(scores, "fluency", ids);
    if (auto it = size.find(k); it != size.end()) row.prompt_size = mean_opt(it->second);
    if (auto it = diversity.find(k); it != diversity.end()) row.diversity = mean_opt(it->second);
    if (auto it = overlap.find(k); it != overlap.end()) row.overlap = mean_opt(it->second);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<AnswerMetricsRow> answer_metrics_table(std::span<const genesis::QAPair> pairs,
                                                   std::span<const judge::JudgeVerdict> verdicts) {
  using Key = std::pair<std::string, std::string>;
  std::map<Key, std::vector<std::string>> items;
  for (const auto& p : pairs)
    if (p.generation == genesis::Generation::SeparateQuestionThenRAG && p.answer)
      items[{p.model_label, std::string(genesis::generation_name(p.generation))}].push_back(p.qa_id);
  const auto scores = item_scores(verdicts);
  std::vector<AnswerMetricsRow> rows;
  for (const auto& [k, ids] : items) {
    AnswerMetricsRow row;
    row.model = k.first;
    row.generation = k.second;
    row.pairs = ids.size();
    row.coherence = mean_of_item_means(scores, "coherence", ids);
    row.answer_relevance = mean_of_item_means(scores, "answer_relevance", ids);
    row.groundedness = mean_of_item_means(scores, "groundedness", ids);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_question_metrics_csv(std::ostream& out, std::span<const QuestionMetricsRow> rows) {
  out << "model,context,generation,pairs,coverage,prompt_size,diversity,overlap,relevance,global_relevance,fluency\n";
  for (const auto& r : rows)
    out << r.model << ',' << r.context << ',' << r.generation << ',' << r.pairs << ',' << fmt2(r.coverage) << ','
        << fmt2(r.prompt_size) << ',' << fmt2(r.diversity) << ',' << fmt2(r.overlap) << ',' << fmt2(r.relevance)
        << ',' << fmt2(r.global_relevance) << ',' << fmt2(r.fluency) << '\n';
}

std::string question_metrics_markdown(std::span<const QuestionMetricsRow> rows) {
  std::ostringstream out;
  out << "| Model | Context | Generation | Coverage | Prompt Size | Diversity | Overlap | Relevance | Global Relevance "
         "| Fluency |\n|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows)
    out << "| " << r.model << " | " << r.context << " | " << r.generation << " | " << md_cell(r.coverage) << " | "
        << md_cell(r.prompt_size) << " | " << md_cell(r.diversity) << " | " << md_cell(r.overlap) << " | "
        << md_cell(r.relevance) << " | " << md_cell(r.global_relevance) << " | " << md_cell(r.fluency) << " |\n";
  return out.str();
}

void write_answer_metrics_csv(std::ostream& out, std::span<const AnswerMetricsRow> rows) {
  out << "model,generation,pairs,coherence,answer_relevance,groundedness\n";
  for (const auto& r : rows)
    out << r.model << ',' << r.generation << ',' << r.pairs << ',' << fmt2(r.coherence) << ','
        << fmt2(r.answer_relevance) << ',' << fmt2(r.groundedness) << '\n';
}

std::string answer_metrics_markdown(std::span<const AnswerMetricsRow> rows) {
  std::ostringstream out;
  out << "| Model | Generation | Coherence | Relevance | Groundedness |\n|---|---|---|---|---|\n";
  for (const auto& r : rows)
    out << "| " << r.model << " | " << r.generation << " | " << md_cell(r.coherence) << " | "
        << md_cell(r.answer_relevance) << " | " << md_cell(r.groundedness) << " |\n";
  return out.str();
}

std::vector<index::RecallReport> read_recall_csv(std::istream& in) {
  std::vector<index::RecallReport> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto f = split_csv(line);
    if (f.size() != 4) continue;
    index::RecallReport r;
    r.k = std::stoul(f[0]);
    r.total_questions = std::stoul(f[1]);
    r.hits = std::stoul(f[2]);
    r.recall = std::stod(f[3]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<index::GrowthPoint> read_growth_csv(std::istream& in) {
  std::vector<index::GrowthPoint> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto f = split_csv(line);
    if (f.size() != 5) continue;
    index::GrowthPoint p;
    p.index_size = std::stoul(f[0]);
    p.report.k = std::stoul(f[1]);
    p.report.total_questions = std::stoul(f[2]);
    p.report.hits = std::stoul(f[3]);
    p.report.recall = std::stod(f[4]);
    out.push_back(std::move(p));
  }
  return out;
}

ReportBundle build_report_bundle(const fs::path& run_dir) {
  ReportBundle b;
  auto pairs = read_pairs_if(run_dir / "qa_pairs.jsonl");
  if (pairs.empty()) pairs = read_pairs_if(run_dir / "questions.jsonl");
  const auto combined = read_pairs_if(run_dir / "combined.jsonl");
  pairs.insert(pairs.end(), combined.begin(), combined.end());

  std::vector<textmetrics::MetricRecord> metrics;
  for (const auto& row : read_jsonl_if(run_dir / "metrics.jsonl"))
    metrics.push_back(textmetrics::metric_record_from_json(row));

  std::vector<judge::JudgeVerdict> gen_verdicts, eval_verdicts;
  for (const auto& row : read_jsonl_if(run_dir / "verdicts.jsonl")) {
    auto v = judge::verdict_from_json(row);
    if (judge::metric_spec(v.metric_name).tier == judge::MetricTier::ModelEval)
      eval_verdicts.push_back(std::move(v));
    else
      gen_verdicts.push_back(std::move(v));
  }

  b.questions = question_metrics_table(pairs, metrics, gen_verdicts);
  b.answers = answer_metrics_table(pairs, gen_verdicts);
  b.judge = judge::aggregate_report(eval_verdicts);
  if (std::ifstream in(run_dir / "recall.csv"); in) b.recall = read_recall_csv(in);
  if (std::ifstream in(run_dir / "growth.csv"); in) b.growth = read_growth_csv(in);
  return b;
}

std::string report_markdown(const ReportBundle& b) {
  std::ostringstream out;
  out << "# Run report\n\n## Question generation\n\n" << question_metrics_markdown(b.questions)
      << "\n## Answer quality\n\n" << answer_metrics_markdown(b.answers) << "\n## Retrieval recall\n\n"
      << index::recall_markdown(b.recall) << "\n## Index growth\n\n" << index::growth_markdown(b.growth)
      << "\n## Model evaluation\n\n" << judge::report_markdown(b.judge);
  return out.str();
}

void write_report_bundle(const ReportBundle& b, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream(out_dir / "report.md") << report_markdown(b);
  {
    std::ofstream out(out_dir / "question_metrics.csv");
    write_question_metrics_csv(out, b.questions);
  }
  {
    std::ofstream out(out_dir / "answer_metrics.csv");
    write_answer_metrics_csv(out, b.answers);
  }
  {
    std::ofstream out(out_dir / "judge_report.csv");
    judge::write_report_csv(out, b.judge);
  }
  {
    std::ofstream out(out_dir / "recall.csv");
    index::write_recall_csv(out, b.recall);
  }
  {
    std::ofstream out(out_dir / "growth.csv");
    index::write_growth_csv(out, b.growth);
  }
}

}  // namespace qagen::pipeline
