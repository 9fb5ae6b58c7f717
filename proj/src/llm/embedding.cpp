#include "qagen/llm/embedding.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "qagen/corpus/tokenizer.hpp"
#include "qagen/digest.hpp"
#include "qagen/error.hpp"
#include "qagen/llm/errors.hpp"
#include "json.hpp"

namespace qagen::llm {

using nlohmann::json;

EmbeddingVector::EmbeddingVector(std::vector<double> v) : values(std::move(v)) {
  norm = std::sqrt(std::inner_product(values.begin(), values.end(), values.begin(), 0.0));
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double unit_uniform(std::uint64_t& state) {
  // 53 random bits in (0, 1).
  return (static_cast<double>(splitmix64(state) >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

void add_token_vector(std::string_view token, std::uint64_t seed, std::vector<double>& acc) {
  std::uint64_t state = fnv1a64(token, seed);
  constexpr double kTwoPi = 6.283185307179586;
  for (std::size_t i = 0; i < acc.size(); i += 2) {
    const double r = std::sqrt(-2.0 * std::log(unit_uniform(state)));
    const double theta = kTwoPi * unit_uniform(state);
    acc[i] += r * std::cos(theta);
    if (i + 1 < acc.size()) acc[i + 1] += r * std::sin(theta);
  }
}

}  // namespace

HashEmbedder::HashEmbedder(std::size_t dims, std::uint64_t seed) : dims_(dims), seed_(seed) {
  if (dims_ == 0) throw ArgumentError("hash embedder dims must be >= 1");
}

std::string HashEmbedder::name() const {
  return "hash(d=" + std::to_string(dims_) + ",seed=" + std::to_string(seed_) + ")";
}

EmbeddingVector HashEmbedder::embed(std::string_view text) {
  if (text.empty()) throw ArgumentError("cannot embed empty text");
  std::vector<double> acc(dims_, 0.0);
  const auto tokens = corpus::tokenize(text);
  if (tokens.empty()) {
    add_token_vector(text, seed_, acc);
  } else {
    for (const auto& t : tokens) add_token_vector(t, seed_, acc);
  }
  double norm = std::sqrt(std::inner_product(acc.begin(), acc.end(), acc.begin(), 0.0));
  if (norm == 0.0) {
    // Cancelling token vectors; fall back to the raw text's own vector.
    add_token_vector(text, seed_ ^ 0x5bd1e995ULL, acc);
    norm = std::sqrt(std::inner_product(acc.begin(), acc.end(), acc.begin(), 0.0));
  }
  for (double& v : acc) v /= norm;
  return EmbeddingVector(std::move(acc));
}

FileEmbedder::FileEmbedder(const std::filesystem::path& path) : path_(path.string()) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file: " + path_);
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      try {
        auto j = json::parse(line);
        add(j.at("text").get<std::string>(), j.at("values").get<std::vector<double>>());
      } catch (const json::exception& e) {
        throw ParseError("bad embedding row in " + path_ + ": " + e.what(), offset);
      }
    }
    offset += line.size() + 1;
  }
}

void FileEmbedder::add(std::string text, std::vector<double> values) {
  table_.insert_or_assign(std::move(text), EmbeddingVector(std::move(values)));
}

EmbeddingVector FileEmbedder::embed(std::string_view text) {
  auto it = table_.find(std::string(text));
  if (it == table_.end()) {
    throw CacheMissError("no precomputed embedding in " + path_ + " for: " + std::string(text.substr(0, 60)), {});
  }
  return it->second;
}

void FileEmbedder::write(const std::filesystem::path& path,
                         const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write embedding file: " + path.string());
  for (const auto& [text, values] : rows) out << json{{"text", text}, {"values", values}}.dump() << '\n';
}

EmbeddingVector embed_text(std::string_view text, Embedder& backend) {
  if (text.empty()) throw ArgumentError("cannot embed empty text");
  return backend.embed(text);
}

}  // namespace qagen::llm
