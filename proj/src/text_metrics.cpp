#include "velvet/text_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "velvet/error.hpp"

namespace velvet {

namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

// Tokens are alphanumeric, so a control byte is a safe joiner.
NgramCounts count_ngrams(const TokenSequence& seq, std::size_t n) {
  NgramCounts counts;
  if (n == 0 || seq.size() < n) return counts;
  std::string key;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) {
    key.clear();
    for (std::size_t k = 0; k < n; ++k) {
      if (k) key.push_back('\x1f');
      key += seq.tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

std::size_t ngram_total(const TokenSequence& seq, std::size_t n) {
  return seq.size() >= n ? seq.size() - n + 1 : 0;
}

std::size_t clipped_overlap(const NgramCounts& ref, const NgramCounts& pred) {
  std::size_t overlap = 0;
  for (const auto& [gram, c] : pred) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(c, it->second);
  }
  return overlap;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

TokenSequence tokenize(std::string_view s) {
  TokenSequence out;
  std::string cur;
  for (char ch : s) {
    const bool alnum = (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z');
    if (alnum) {
      cur.push_back(ch >= 'A' && ch <= 'Z' ? static_cast<char>(ch - 'A' + 'a') : ch);
    } else if (!cur.empty()) {
      out.tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.tokens.push_back(std::move(cur));
  return out;
}

double f1_of(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

RougeScore rouge_n(const TokenSequence& reference, const TokenSequence& prediction, std::size_t n) {
  if (n == 0) throw DomainError("rouge_n requires n >= 1");
  const std::size_t overlap = clipped_overlap(count_ngrams(reference, n), count_ngrams(prediction, n));
  RougeScore s;
  s.precision = ratio(overlap, ngram_total(prediction, n));
  s.recall = ratio(overlap, ngram_total(reference, n));
  s.f1 = f1_of(s.precision, s.recall);
  return s;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(const TokenSequence& reference, const TokenSequence& prediction) {
  const std::size_t l = lcs_length(reference.tokens, prediction.tokens);
  RougeScore s;
  s.precision = ratio(l, prediction.size());
  s.recall = ratio(l, reference.size());
  s.f1 = f1_of(s.precision, s.recall);
  return s;
}

void BleuStats::add(const TokenSequence& reference, const TokenSequence& prediction) {
  for (std::size_t n = 1; n <= matches.size(); ++n) {
    matches[n - 1] += clipped_overlap(count_ngrams(reference, n), count_ngrams(prediction, n));
    totals[n - 1] += ngram_total(prediction, n);
  }
  reference_length += reference.size();
  prediction_length += prediction.size();
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  if (other.matches.size() != matches.size()) throw DomainError("BLEU order mismatch");
  for (std::size_t i = 0; i < matches.size(); ++i) {
    matches[i] += other.matches[i];
    totals[i] += other.totals[i];
  }
  reference_length += other.reference_length;
  prediction_length += other.prediction_length;
  return *this;
}

double BleuStats::score() const {
  if (prediction_length == 0 || matches.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (matches[i] == 0 || totals[i] == 0) return 0.0;
    log_sum += std::log(ratio(matches[i], totals[i]));
  }
  const double r = static_cast<double>(reference_length);
  const double c = static_cast<double>(prediction_length);
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return std::min(1.0, bp * std::exp(log_sum / static_cast<double>(matches.size())));
}

double bleu_corpus(std::span<const TokenSequence> references,
                   std::span<const TokenSequence> predictions, std::size_t max_n) {
  if (references.size() != predictions.size())
    throw DomainError("bleu_corpus: references and predictions differ in length");
  if (references.empty()) throw DomainError("bleu_corpus: empty corpus");
  if (max_n == 0) throw DomainError("bleu_corpus: max_n must be >= 1");
  BleuStats stats(max_n);
  for (std::size_t i = 0; i < references.size(); ++i) stats.add(references[i], predictions[i]);
  return stats.score();
}

}  // namespace velvet
