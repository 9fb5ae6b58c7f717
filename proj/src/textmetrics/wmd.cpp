#include "qagen/textmetrics/wmd.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "qagen/corpus/tokenizer.hpp"
#include "qagen/digest.hpp"

namespace qagen::textmetrics {

void WordEmbeddingTable::add(std::string token, std::vector<double> vector) {
  if (vector.empty()) throw ArgumentError("word vector for '" + token + "' is empty");
  if (dims_ == 0) dims_ = vector.size();
  if (vector.size() != dims_)
    throw ArgumentError("word vector for '" + token + "' has " + std::to_string(vector.size()) + " dims, expected " +
                        std::to_string(dims_));
  table_.insert_or_assign(std::move(token), std::move(vector));
}

const std::vector<double>* WordEmbeddingTable::find(std::string_view token) const {
  auto it = table_.find(std::string(token));
  return it == table_.end() ? nullptr : &it->second;
}

const std::vector<double>& WordEmbeddingTable::at(std::string_view token) const {
  if (const auto* v = find(token)) return *v;
  throw OovError("token not in embedding table: " + std::string(token), {std::string(token)});
}

WordEmbeddingTable WordEmbeddingTable::scaled(double factor) const {
  WordEmbeddingTable out(dims_);
  for (const auto& [token, vec] : table_) {
    std::vector<double> s(vec);
    for (double& x : s) x *= factor;
    out.table_.emplace(token, std::move(s));
  }
  return out;
}

WordEmbeddingTable WordEmbeddingTable::load_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open word-vector file " + path.string());
  WordEmbeddingTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> values;
    std::string field;
    while (fields >> field) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + field + "'", lineno, line);
      }
    }
    if (lineno == 1 && values.size() == 1 && table.size() == 0 &&
        token.find_first_not_of("0123456789") == std::string::npos)
      continue;  // "<count> <dims>" header
    try {
      table.add(std::move(token), std::move(values));
    } catch (const ArgumentError& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what(), lineno, line);
    }
  }
  return table;
}

WordEmbeddingTable WordEmbeddingTable::synthetic(std::span<const std::string> vocab, std::size_t dims,
                                                 std::uint64_t seed) {
  if (dims == 0) throw ArgumentError("synthetic table dims must be >= 1");
  WordEmbeddingTable table(dims);
  for (const auto& token : vocab) {
    std::mt19937_64 rng(fnv1a64(token, seed));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(dims);
    for (double& x : v) x = gauss(rng);
    table.add(token, std::move(v));
  }
  return table;
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("euclidean: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

NbowDocument make_nbow(std::string_view text, const WordEmbeddingTable& table) {
  NbowDocument doc;
  double total = 0.0;
  for (auto& token : corpus::tokenize(text)) {
    if (!table.find(token)) {
      if (std::find(doc.dropped_oov.begin(), doc.dropped_oov.end(), token) == doc.dropped_oov.end())
        doc.dropped_oov.push_back(token);
      continue;
    }
    auto it = std::find(doc.tokens.begin(), doc.tokens.end(), token);
    if (it == doc.tokens.end()) {
      doc.tokens.push_back(std::move(token));
      doc.weights.push_back(1.0);
    } else {
      doc.weights[static_cast<std::size_t>(it - doc.tokens.begin())] += 1.0;
    }
    total += 1.0;
  }
  if (doc.tokens.empty()) {
    std::string listed;
    for (const auto& t : doc.dropped_oov) listed += (listed.empty() ? "" : ", ") + t;
    throw OovError("document has no in-vocabulary tokens (dropped: " + (listed.empty() ? "<none>" : listed) + ")",
                   doc.dropped_oov);
  }
  if (!doc.dropped_oov.empty()) {
    std::string listed;
    for (const auto& t : doc.dropped_oov) listed += (listed.empty() ? "" : ", ") + t;
    spdlog::warn("wmd: dropped out-of-vocabulary tokens: {}", listed);
  }
  for (double& w : doc.weights) w /= total;
  return doc;
}

namespace {

Matrix ground_cost(const NbowDocument& a, const NbowDocument& b, const WordEmbeddingTable& table) {
  Matrix cost(a.tokens.size(), b.tokens.size());
  for (std::size_t i = 0; i < a.tokens.size(); ++i) {
    const auto& va = table.at(a.tokens[i]);
    for (std::size_t j = 0; j < b.tokens.size(); ++j) cost(i, j) = euclidean(va, table.at(b.tokens[j]));
  }
  return cost;
}

}  // namespace

WmdResult wmd(const NbowDocument& a, const NbowDocument& b, const WordEmbeddingTable& table) {
  WmdResult out;
  out.plan = solve_transport(a.weights, b.weights, ground_cost(a, b, table));
  out.distance = out.plan.cost;
  out.source = a;
  out.target = b;
  return out;
}

WmdResult wmd(std::string_view doc_a, std::string_view doc_b, const WordEmbeddingTable& table) {
  return wmd(make_nbow(doc_a, table), make_nbow(doc_b, table), table);
}

double relaxed_wmd_lower_bound(const NbowDocument& a, const NbowDocument& b, const WordEmbeddingTable& table) {
  const Matrix cost = ground_cost(a, b, table);
  double forward = 0.0;
  for (std::size_t i = 0; i < cost.rows; ++i) {
    double best = INFINITY;
    for (std::size_t j = 0; j < cost.cols; ++j) best = std::min(best, cost(i, j));
    forward += a.weights[i] * best;
  }
  double backward = 0.0;
  for (std::size_t j = 0; j < cost.cols; ++j) {
    double best = INFINITY;
    for (std::size_t i = 0; i < cost.rows; ++i) best = std::min(best, cost(i, j));
    backward += b.weights[j] * best;
  }
  return std::max(forward, backward);
}

}  // namespace qagen::textmetrics
