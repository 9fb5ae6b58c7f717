#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "json.hpp"

namespace qagen::textmetrics {

struct Details {
  std::size_t question_tokens = 0;
  std::size_t answer_tokens = 0;
};

// Word-token counts of a question and its answer.
Details details(std::string_view question, std::string_view answer);

// {metric, value, parameters, inputs_digest}
struct MetricRecord {
  std::string metric;
  double value = 0.0;
  nlohmann::json parameters = nlohmann::json::object();
  std::string inputs_digest;
};

nlohmann::json to_json(const MetricRecord& record);
MetricRecord metric_record_from_json(const nlohmann::json& j);

}  // namespace qagen::textmetrics
