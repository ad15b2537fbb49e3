#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace velvet {

/// One line of a prediction file: {input, reference, prediction[, error]}.
struct PredictionRecord {
  std::string input;
  std::string reference;
  std::string prediction;
  std::optional<std::string> error;
  int attempts = 0;  // written only when > 0

  bool operator==(const PredictionRecord&) const = default;
};

std::string write_predictions(const std::vector<PredictionRecord>& records);
void write_predictions(const std::vector<PredictionRecord>& records, const std::string& path);

/// Throws ParseError naming the line for malformed JSON or missing keys.
std::vector<PredictionRecord> read_predictions_text(std::string_view text);
std::vector<PredictionRecord> read_predictions(const std::string& path);

}  // namespace velvet
