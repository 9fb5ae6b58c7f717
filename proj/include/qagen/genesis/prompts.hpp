#pragma once

#include <string>
#include <vector>

#include "qagen/llm/prompt_template.hpp"

namespace qagen::genesis {

// Built-in "tag", "tag_reformat", "question", "combined", "answer_rag", "answer_direct".
llm::TemplateSet default_templates();

// Few-shot questions for the {examples} slot.
const std::vector<std::string>& default_examples();
std::string examples_slot(const std::vector<std::string>& examples);

}  // namespace qagen::genesis
