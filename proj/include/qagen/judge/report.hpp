#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qagen/judge/verdict.hpp"

namespace qagen::judge {

inline constexpr double kGuidelinePassThreshold = 0.5;

struct ReportCell {
  std::size_t items = 0;       // distinct items with >= 1 parsed trial
  double value = 0.0;          // mean score; fraction correct for ThreeWay
  double stddev = 0.0;         // population stddev of per-trial-index values
  double pass_fraction = 0.0;  // ZeroToOne: fraction of items with mean >= threshold
};

struct ReportRow {
  std::string subject;
  bool fine_tuned = false;
  std::string metric;
  Scale scale = Scale::OneToFive;
  std::optional<ReportCell> base;  // without RAG
  std::optional<ReportCell> rag;   // with RAG
};

struct ReportTable {
  std::vector<ReportRow> rows;  // sorted by (fine_tuned, subject, metric)
};

// Groups parse_ok verdicts by (subject, fine_tuned, metric, rag). Per item,
// trial scores are averaged; the cell value averages items. The ± is the
// population stddev across trial indices of the per-trial mean over items.
ReportTable aggregate_report(std::span<const JudgeVerdict> verdicts,
                             double pass_threshold = kGuidelinePassThreshold);

// model,fine_tuned,metric,rag,items,value,stddev,pass_fraction
void write_report_csv(std::ostream& out, const ReportTable& table);
// | Model | Fine-tuned | <Metric> | +RAG |, one table per metric.
std::string report_markdown(const ReportTable& table);

std::string format_cell(const ReportCell& cell, Scale scale);

}  // namespace qagen::judge
