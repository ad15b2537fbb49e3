#include "velvet/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "velvet/error.hpp"
#include "velvet/io.hpp"
#include "velvet/text.hpp"

namespace velvet {

using nlohmann::ordered_json;

IngredientEmbedding IngredientEmbedding::build(std::span<const Formulation> train) {
  if (train.empty()) throw DomainError("cannot build an embedding from an empty training set");

  // key -> column -> value; std::map keeps the vocabulary sorted.
  std::map<std::string, std::vector<std::pair<std::size_t, double>>> rows;
  for (std::size_t j = 0; j < train.size(); ++j) {
    for (const auto& c : train[j].composition) {
      if (!std::isfinite(c.proportion) || c.proportion < 0.0 || c.proportion > 100.0)
        throw DomainError(fmt::format("formulation {}: proportion {} of '{}' outside [0, 100]",
                                      train[j].id, c.proportion, c.ingredient.name));
      auto& row = rows[c.ingredient.key];
      if (!row.empty() && row.back().first == j) {
        // Two columns with the same normalized name in one formulation.
        row.back().second = std::min(1.0, row.back().second + c.proportion / 100.0);
      } else {
        row.emplace_back(j, c.proportion / 100.0);
      }
    }
  }
  std::vector<std::pair<std::string, std::vector<std::pair<std::size_t, double>>>> flat(
      std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  return from_sparse(train.size(), std::move(flat));
}

IngredientEmbedding IngredientEmbedding::from_sparse(
    std::size_t n_formulations,
    std::vector<std::pair<std::string, std::vector<std::pair<std::size_t, double>>>> rows) {
  if (n_formulations == 0) throw DomainError("embedding needs at least one formulation");
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  IngredientEmbedding emb;
  emb.n_formulations_ = n_formulations;
  emb.matrix_.assign(rows.size() * n_formulations, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& [key, entries] = rows[i];
    if (key.empty() || normalize_text(key) != key)
      throw DomainError(fmt::format("embedding key '{}' is not a normalized name", key));
    if (i > 0 && rows[i - 1].first == key)
      throw DomainError(fmt::format("duplicate embedding key '{}'", key));
    for (const auto& [col, value] : entries) {
      if (col >= n_formulations)
        throw DomainError(fmt::format("embedding key '{}': column {} out of range", key, col));
      if (!(value >= 0.0 && value <= 1.0))
        throw DomainError(fmt::format("embedding key '{}': value {} outside [0, 1]", key, value));
      emb.matrix_[i * n_formulations + col] = value;
    }
    emb.vocabulary_.push_back(key);
  }
  emb.finish();
  return emb;
}

void IngredientEmbedding::finish() {
  index_.clear();
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) index_.emplace(vocabulary_[i], i);
  penalty_ = recompute_max_distance();
}

std::optional<std::size_t> IngredientEmbedding::index_of(std::string_view key) const {
  auto it = index_.find(std::string(key));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const double> IngredientEmbedding::row(std::size_t i) const {
  return std::span<const double>(matrix_).subspan(i * n_formulations_, n_formulations_);
}

double IngredientEmbedding::distance(std::size_t i, std::size_t j) const {
  const double* a = matrix_.data() + i * n_formulations_;
  const double* b = matrix_.data() + j * n_formulations_;
  double ss = 0.0;
  for (std::size_t k = 0; k < n_formulations_; ++k) {
    const double d = a[k] - b[k];
    ss += d * d;
  }
  return std::sqrt(ss);
}

double IngredientEmbedding::recompute_max_distance() const {
  double best = 0.0;
  for (std::size_t i = 0; i < vocabulary_.size(); ++i)
    for (std::size_t j = i + 1; j < vocabulary_.size(); ++j) best = std::max(best, distance(i, j));
  return best;
}

std::string IngredientEmbedding::to_json() const {
  ordered_json j;
  j["format"] = "velvet-embedding";
  j["version"] = kEmbeddingFormatVersion;
  j["n_formulations"] = n_formulations_;
  j["penalty"] = penalty_;
  j["ingredients"] = ordered_json::array();
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    ordered_json idx = ordered_json::array();
    ordered_json val = ordered_json::array();
    const auto r = row(i);
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r[k] != 0.0) {
        idx.push_back(k);
        val.push_back(r[k]);
      }
    }
    j["ingredients"].push_back({{"key", vocabulary_[i]}, {"index", idx}, {"value", val}});
  }
  return j.dump() + "\n";
}

IngredientEmbedding IngredientEmbedding::from_json(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("embedding is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", std::string()) != "velvet-embedding")
      throw ParseError("not a velvet-embedding artifact");
    const int version = j.at("version").get<int>();
    if (version != kEmbeddingFormatVersion)
      throw ParseError(fmt::format("unsupported embedding version {}", version));
    const auto n = j.at("n_formulations").get<std::size_t>();
    std::vector<std::pair<std::string, std::vector<std::pair<std::size_t, double>>>> rows;
    for (const auto& ing : j.at("ingredients")) {
      const auto idx = ing.at("index").get<std::vector<std::size_t>>();
      const auto val = ing.at("value").get<std::vector<double>>();
      if (idx.size() != val.size()) throw ParseError("embedding index/value length mismatch");
      std::vector<std::pair<std::size_t, double>> entries;
      for (std::size_t k = 0; k < idx.size(); ++k) entries.emplace_back(idx[k], val[k]);
      rows.emplace_back(ing.at("key").get<std::string>(), std::move(entries));
    }
    auto emb = from_sparse(n, std::move(rows));
    const double stored = j.at("penalty").get<double>();
    if (stored != emb.penalty_)
      throw ParseError(fmt::format("stored penalty {} disagrees with recomputed {}", stored,
                                   emb.penalty_));
    return emb;
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("bad embedding field: ") + e.what());
  } catch (const DomainError& e) {
    throw ParseError(std::string("bad embedding: ") + e.what());
  }
}

void IngredientEmbedding::save(const std::string& path) const { write_file(path, to_json()); }

IngredientEmbedding IngredientEmbedding::load(const std::string& path) {
  return from_json(read_file(path));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> dedup(std::span<const std::string> keys) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& k : keys)
    if (seen.insert(k).second) out.push_back(k);
  return out;
}

}  // namespace

VelvetScore velvet_score(std::span<const std::string> predicted_keys,
                         std::span<const std::string> reference_keys,
                         const IngredientEmbedding& emb) {
  const auto p = dedup(predicted_keys);
  const auto r = dedup(reference_keys);
  std::vector<std::optional<std::size_t>> pi;
  std::vector<std::optional<std::size_t>> ri;
  VelvetScore out;
  for (const auto& k : p) {
    pi.push_back(emb.index_of(k));
    if (!pi.back()) ++out.oov_count;
  }
  for (const auto& k : r) {
    ri.push_back(emb.index_of(k));
    if (!ri.back()) ++out.oov_count;
  }
  if (p.empty() || r.empty()) {
    out.score = emb.penalty();
    out.empty_side = true;
    return out;
  }
  // Summing sorted terms makes the score independent of argument order.
  std::vector<double> terms;
  terms.reserve(pi.size() * ri.size());
  for (const auto& a : pi)
    for (const auto& b : ri) terms.push_back((a && b) ? emb.distance(*a, *b) : emb.penalty());
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  out.score = sum / static_cast<double>(p.size() * r.size());
  return out;
}

VelvetScore velvet_score(const ParsedResponse& prediction, const ParsedResponse& reference,
                         const IngredientEmbedding& emb) {
  return velvet_score(prediction.distinct_keys(), reference.distinct_keys(), emb);
}

VelvetScore velvet_api_score(std::string_view api_name, const ParsedResponse& prediction,
                             const IngredientEmbedding& emb) {
  const std::string api_key = normalize_text(api_name);
  const auto keys = prediction.distinct_keys();
  return velvet_score(keys, std::span<const std::string>(&api_key, 1), emb);
}

VelvetResult velvet_corpus(std::span<const std::pair<ParsedResponse, ParsedResponse>> pairs,
                           const IngredientEmbedding& emb) {
  if (pairs.empty()) throw DomainError("velvet_corpus: no pairs");
  VelvetResult out;
  std::vector<double> scores;
  for (const auto& [pred, ref] : pairs) {
    out.per_example.push_back(velvet_score(pred, ref, emb));
    scores.push_back(out.per_example.back().score);
  }
  const auto s = mean_std(scores);
  out.mean = s.mean;
  out.std = s.std;
  return out;
}

}  // namespace velvet
