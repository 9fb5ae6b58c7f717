#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qagen/genesis/generation.hpp"

namespace qagen::genesis {

struct FineTuneRecord {
  std::string prompt;
  std::string completion;
  bool mask_prompt = true;

  bool operator==(const FineTuneRecord&) const = default;
};

nlohmann::json to_json(const FineTuneRecord& record);
FineTuneRecord finetune_record_from_json(const nlohmann::json& j);

struct ExportSummary {
  std::size_t exported = 0;
  std::size_t rejected = 0;
};

// One {prompt, completion, mask_prompt} line per answered pair; each
// answerless pair becomes a {qa_id, reason} line in `rejects`.
ExportSummary export_finetune_dataset(std::span<const QAPair> pairs, std::ostream& out, std::ostream& rejects);

std::vector<FineTuneRecord> read_finetune_jsonl(std::istream& in);

}  // namespace qagen::genesis
