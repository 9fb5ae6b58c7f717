#include "qagen/textmetrics/details.hpp"

#include "qagen/corpus/tokenizer.hpp"
#include "qagen/error.hpp"

namespace qagen::textmetrics {

Details details(std::string_view question, std::string_view answer) {
  return {corpus::count_tokens(question), corpus::count_tokens(answer)};
}

nlohmann::json to_json(const MetricRecord& record) {
  return {{"metric", record.metric},
          {"value", record.value},
          {"parameters", record.parameters},
          {"inputs_digest", record.inputs_digest}};
}

MetricRecord metric_record_from_json(const nlohmann::json& j) {
  MetricRecord r;
  try {
    r.metric = j.at("metric").get<std::string>();
    r.value = j.at("value").get<double>();
    r.parameters = j.value("parameters", nlohmann::json::object());
    r.inputs_digest = j.value("inputs_digest", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("metric", e.what());
  }
  return r;
}

}  // namespace qagen::textmetrics
