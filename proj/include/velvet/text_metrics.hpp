#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace velvet {

/// Lowercase alphanumeric tokens, never empty strings.
struct TokenSequence {
  std::vector<std::string> tokens;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool operator==(const TokenSequence&) const = default;
};

/// Maximal runs of ASCII [A-Za-z0-9], lowercased; all other bytes separate.
TokenSequence tokenize(std::string_view s);

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// 2PR/(P+R), or 0 when P+R == 0.
double f1_of(double precision, double recall);

RougeScore rouge_n(const TokenSequence& reference, const TokenSequence& prediction, std::size_t n);
RougeScore rouge_l(const TokenSequence& reference, const TokenSequence& prediction);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

inline constexpr std::size_t kBleuMaxOrder = 4;

/// Sufficient statistics for corpus BLEU; pooling is addition.
struct BleuStats {
  std::vector<std::size_t> matches;  // clipped n-gram matches, index n-1
  std::vector<std::size_t> totals;   // prediction n-grams, index n-1
  std::size_t reference_length = 0;
  std::size_t prediction_length = 0;

  explicit BleuStats(std::size_t max_n = kBleuMaxOrder) : matches(max_n, 0), totals(max_n, 0) {}

  void add(const TokenSequence& reference, const TokenSequence& prediction);
  BleuStats& operator+=(const BleuStats& other);
  double score() const;
};

/// Throws DomainError on an empty corpus or mismatched lengths.
double bleu_corpus(std::span<const TokenSequence> references,
                   std::span<const TokenSequence> predictions, std::size_t max_n = kBleuMaxOrder);

}  // namespace velvet
