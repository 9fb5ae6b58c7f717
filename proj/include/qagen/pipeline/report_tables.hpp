#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qagen/genesis/generation.hpp"
#include "qagen/index/recall.hpp"
#include "qagen/judge/report.hpp"
#include "qagen/judge/verdict.hpp"
#include "qagen/textmetrics/details.hpp"

namespace qagen::pipeline {

// One row per (model, context mode, generation) of the question-generation run.
// Judge columns average per-question means of parsed trials; diversity and
// overlap average sections; prompt_size averages question + answer tokens.
struct QuestionMetricsRow {
  std::string model;
  std::string context;
  std::string generation;
  std::size_t pairs = 0;
  std::optional<double> coverage;
  std::optional<double> prompt_size;
  std::optional<double> diversity;
  std::optional<double> overlap;
  std::optional<double> relevance;
  std::optional<double> global_relevance;
  std::optional<double> fluency;
};

struct AnswerMetricsRow {
  std::string model;
  std::string generation;
  std::size_t pairs = 0;
  std::optional<double> coherence;
  std::optional<double> answer_relevance;
  std::optional<double> groundedness;
};

std::vector<QuestionMetricsRow> question_metrics_table(std::span<const genesis::QAPair> pairs,
                                                       std::span<const textmetrics::MetricRecord> metrics,
                                                       std::span<const judge::JudgeVerdict> verdicts);

std::vector<AnswerMetricsRow> answer_metrics_table(std::span<const genesis::QAPair> pairs,
                                                   std::span<const judge::JudgeVerdict> verdicts);

// model,context,generation,pairs,coverage,prompt_size,diversity,overlap,relevance,global_relevance,fluency
void write_question_metrics_csv(std::ostream& out, std::span<const QuestionMetricsRow> rows);
std::string question_metrics_markdown(std::span<const QuestionMetricsRow> rows);
// model,generation,pairs,coherence,answer_relevance,groundedness
void write_answer_metrics_csv(std::ostream& out, std::span<const AnswerMetricsRow> rows);
std::string answer_metrics_markdown(std::span<const AnswerMetricsRow> rows);

std::vector<index::RecallReport> read_recall_csv(std::istream& in);
std::vector<index::GrowthPoint> read_growth_csv(std::istream& in);

// Everything the report stage shows, read from whichever stage files exist
// in the run directory. Missing files give empty tables.
struct ReportBundle {
  std::vector<QuestionMetricsRow> questions;
  std::vector<AnswerMetricsRow> answers;
  judge::ReportTable judge;  // model-evaluation metrics only
  std::vector<index::RecallReport> recall;
  std::vector<index::GrowthPoint> growth;
};

ReportBundle build_report_bundle(const std::filesystem::path& run_dir);

// report.md plus question_metrics.csv, answer_metrics.csv, judge_report.csv,
// recall.csv and growth.csv.
void write_report_bundle(const ReportBundle& bundle, const std::filesystem::path& out_dir);

std::string report_markdown(const ReportBundle& bundle);

}  // namespace qagen::pipeline
