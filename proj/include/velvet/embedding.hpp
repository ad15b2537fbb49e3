#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "velvet/formulation.hpp"
#include "velvet/response_parser.hpp"
#include "velvet/stats.hpp"

namespace velvet {

/// Penalty reported for the original dataset; kept for documentation only.
inline constexpr double kReportedDatasetPenalty = 9.4475;

inline constexpr int kEmbeddingFormatVersion = 1;

/// Ingredient co-occurrence space: one row per normalized ingredient name,
/// one column per training formulation, entry = w/w% / 100 (0 when absent).
/// Immutable after construction.
class IngredientEmbedding {
 public:
  /// Throws DomainError on an empty training set or on proportions outside
  /// [0, 100].
  static IngredientEmbedding build(std::span<const Formulation> train);

  /// Sparse import. Each entry is (ingredient key, [(formulation index, value)]).
  static IngredientEmbedding from_sparse(
      std::size_t n_formulations,
      std::vector<std::pair<std::string, std::vector<std::pair<std::size_t, double>>>> rows);

  std::size_t size() const { return vocabulary_.size(); }
  std::size_t n_formulations() const { return n_formulations_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }

  /// Largest Euclidean distance over all vocabulary pairs; 0 with < 2 entries.
  double penalty() const { return penalty_; }
  /// Fewer than two ingredients: no observed pairs, penalty forced to 0.
  bool degenerate() const { return vocabulary_.size() < 2; }

  /// Row index for a normalized key.
  std::optional<std::size_t> index_of(std::string_view key) const;
  std::span<const double> row(std::size_t i) const;
  double distance(std::size_t i, std::size_t j) const;

  /// Streaming max over all pairs, recomputed from the matrix.
  double recompute_max_distance() const;

  std::string to_json() const;
  static IngredientEmbedding from_json(std::string_view text);
  void save(const std::string& path) const;
  static IngredientEmbedding load(const std::string& path);

 private:
  IngredientEmbedding() = default;
  void finish();

  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t n_formulations_ = 0;
  std::vector<double> matrix_;  // row-major |V| x F
  double penalty_ = 0.0;
};

struct VelvetScore {
  double score = 0.0;
  std::size_t oov_count = 0;  // distinct names on either side missing from the vocabulary
  bool empty_side = false;
};

/// Mean distance over every (predicted, reference) pair of distinct
/// normalized names; pairs touching an unknown name cost the penalty.
VelvetScore velvet_score(std::span<const std::string> predicted_keys,
                         std::span<const std::string> reference_keys,
                         const IngredientEmbedding& emb);
VelvetScore velvet_score(const ParsedResponse& prediction, const ParsedResponse& reference,
                         const IngredientEmbedding& emb);

/// Mean distance from the API to each predicted excipient.
VelvetScore velvet_api_score(std::string_view api_name, const ParsedResponse& prediction,
                             const IngredientEmbedding& emb);

struct VelvetResult {
  std::vector<VelvetScore> per_example;
  double mean = 0.0;
  double std = 0.0;
};

/// Throws DomainError on an empty list.
VelvetResult velvet_corpus(std::span<const std::pair<ParsedResponse, ParsedResponse>> pairs,
                           const IngredientEmbedding& emb);

}  // namespace velvet
