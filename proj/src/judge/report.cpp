#include "qagen/judge/report.hpp"

#include <cctype>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "qagen/judge/variance.hpp"

namespace qagen::judge {

namespace {

struct GroupKey {
  bool fine_tuned;
  std::string subject;
  std::string metric;
  auto operator<=>(const GroupKey&) const = default;
};

double indicator_or_score(const JudgeVerdict& v, Scale scale) {
  if (scale == Scale::ThreeWay) return v.grade == Grade::Correct ? 1.0 : 0.0;
  return v.score;
}

ReportCell summarize(const std::vector<const JudgeVerdict*>& verdicts, Scale scale, double threshold) {
  std::map<std::string, std::vector<double>> by_item;
  std::map<int, std::vector<double>> by_trial;
  for (const auto* v : verdicts) {
    const double x = indicator_or_score(*v, scale);
    by_item[v->item_id].push_back(x);
    by_trial[v->trial_index].push_back(x);
  }
  ReportCell cell;
  cell.items = by_item.size();
  std::vector<double> item_means;
  std::size_t passing = 0;
  for (const auto& [_, xs] : by_item) {
    item_means.push_back(mean_of(xs));
    if (item_means.back() >= threshold) ++passing;
  }
  cell.value = mean_of(item_means);
  std::vector<double> trial_means;
  for (const auto& [_, xs] : by_trial) trial_means.push_back(mean_of(xs));
  cell.stddev = population_stddev(trial_means);
  if (scale == Scale::ZeroToOne && cell.items > 0)
    cell.pass_fraction = static_cast<double>(passing) / static_cast<double>(cell.items);
  return cell;
}

std::string display_name(const std::string& metric) {
  if (metric == "guideline") return "Accuracy";
  if (metric == "correctness") return "Fully correct";
  std::string out = metric;
  for (char& c : out)
    if (c == '_') c = ' ';
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

std::string fmt(const char* pattern, double a, double b) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

}  // namespace

ReportTable aggregate_report(std::span<const JudgeVerdict> verdicts, double pass_threshold) {
  std::map<GroupKey, std::pair<std::vector<const JudgeVerdict*>, std::vector<const JudgeVerdict*>>> groups;
  for (const auto& v : verdicts) {
    if (!v.parse_ok) continue;
    auto& g = groups[{v.fine_tuned, v.subject, v.metric_name}];
    (v.rag ? g.second : g.first).push_back(&v);
  }
  ReportTable table;
  for (const auto& [key, lists] : groups) {
    ReportRow row;
    row.subject = key.subject;
    row.fine_tuned = key.fine_tuned;
    row.metric = key.metric;
    row.scale = metric_spec(key.metric).scale;
    if (!lists.first.empty()) row.base = summarize(lists.first, row.scale, pass_threshold);
    if (!lists.second.empty()) row.rag = summarize(lists.second, row.scale, pass_threshold);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_cell(const ReportCell& cell, Scale scale) {
  if (scale == Scale::OneToFive) return fmt("%.2f ± %.2f", cell.value, cell.stddev);
  return fmt("%.0f%% ± %.0f%%", cell.value * 100.0, cell.stddev * 100.0);
}

void write_report_csv(std::ostream& out, const ReportTable& table) {
  out << "model,fine_tuned,metric,rag,items,value,stddev,pass_fraction\n";
  char buf[128];
  for (const auto& row : table.rows) {
    for (const auto& [cell, rag] : {std::pair{&row.base, false}, std::pair{&row.rag, true}}) {
      if (!*cell) continue;
      const auto& c = **cell;
      std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g", c.items, c.value, c.stddev, c.pass_fraction);
      out << row.subject << ',' << (row.fine_tuned ? 1 : 0) << ',' << row.metric << ',' << (rag ? 1 : 0) << ','
          << buf << '\n';
    }
  }
}

std::string report_markdown(const ReportTable& table) {
  if (table.rows.empty()) return "| Model | Fine-tuned | Metric | +RAG |\n|---|---|---|---|\n";
  std::set<std::string> metrics;
  for (const auto& row : table.rows) metrics.insert(row.metric);
  std::string out;
  for (const auto& metric : metrics) {
    if (!out.empty()) out += "\n";
    out += "| Model | Fine-tuned | " + display_name(metric) + " | +RAG |\n|---|---|---|---|\n";
    for (const auto& row : table.rows) {
      if (row.metric != metric) continue;
      out += "| " + row.subject + " | " + (row.fine_tuned ? "yes" : "") + " | " +
             (row.base ? format_cell(*row.base, row.scale) : "-") + " | " +
             (row.rag ? format_cell(*row.rag, row.scale) : "-") + " |\n";
    }
  }
  return out;
}

}  // namespace qagen::judge
