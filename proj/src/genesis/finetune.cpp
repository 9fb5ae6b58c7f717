#include "qagen/genesis/finetune.hpp"

#include <istream>
#include <ostream>

namespace qagen::genesis {

using nlohmann::json;

json to_json(const FineTuneRecord& r) {
  return {{"prompt", r.prompt}, {"completion", r.completion}, {"mask_prompt", r.mask_prompt}};
}

FineTuneRecord finetune_record_from_json(const json& j) {
  FineTuneRecord r;
  try {
    r.prompt = j.at("prompt").get<std::string>();
    r.completion = j.at("completion").get<std::string>();
    r.mask_prompt = j.at("mask_prompt").get<bool>();
  } catch (const json::exception& e) {
    throw SchemaError("finetune_record", e.what());
  }
  return r;
}

ExportSummary export_finetune_dataset(std::span<const QAPair> pairs, std::ostream& out, std::ostream& rejects) {
  ExportSummary summary;
  for (const auto& p : pairs) {
    if (!p.answer || p.answer->find_first_not_of(" \t\r\n") == std::string::npos) {
      rejects << json{{"qa_id", p.qa_id}, {"reason", p.answer ? "empty answer" : "no answer"}}.dump() << '\n';
      ++summary.rejected;
      continue;
    }
    out << to_json(FineTuneRecord{p.question, *p.answer, true}).dump() << '\n';
    ++summary.exported;
  }
  return summary;
}

std::vector<FineTuneRecord> read_finetune_jsonl(std::istream& in) {
  std::vector<FineTuneRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(finetune_record_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ParseError("fine-tune JSONL line " + std::to_string(lineno) + ": " + e.what(), e.byte, line);
    }
  }
  return out;
}

}  // namespace qagen::genesis
