#pragma once

#include <string>

#include "qagen/llm/stub.hpp"

namespace qagen::pipeline {

// Deterministic stand-in for a chat model, keyed on request purpose. It reads
// its inputs back out of the built-in prompt layouts:
//   tag          dictionary lookup of places, crops, cattle, diseases
//   genq         one question per sentence of the section (at most 15)
//   combined     the same questions, each answered with its sentence
//   gena / eval_rag   the snippet sentence sharing most words with the question
//   answer       a generic answer that ignores the corpus
//   judge:*      word-overlap scores in the default judge reply format
llm::Responder make_offline_responder();

std::shared_ptr<llm::ChatBackend> make_offline_backend(const std::string& name = "offline");

}  // namespace qagen::pipeline
