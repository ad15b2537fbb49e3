#include "velvet/predictions.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "velvet/error.hpp"
#include "velvet/io.hpp"
#include "velvet/text.hpp"

namespace velvet {

using nlohmann::ordered_json;

std::string write_predictions(const std::vector<PredictionRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    ordered_json j;
    j["input"] = r.input;
    j["reference"] = r.reference;
    j["prediction"] = r.prediction;
    if (r.error) j["error"] = *r.error;
    if (r.attempts > 0) j["attempts"] = r.attempts;
    out += j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

void write_predictions(const std::vector<PredictionRecord>& records, const std::string& path) {
  write_file(path, write_predictions(records));
}

std::vector<PredictionRecord> read_predictions_text(std::string_view text) {
  std::vector<PredictionRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const ordered_json::exception& e) {
      throw ParseError(fmt::format("line {}: malformed JSON ({})", line_no, e.what()), line_no);
    }
    if (!j.is_object()) throw ParseError(fmt::format("line {}: not a JSON object", line_no), line_no);
    PredictionRecord r;
    for (const char* key : {"input", "reference", "prediction"}) {
      auto it = j.find(key);
      if (it == j.end() || !it->is_string())
        throw ParseError(fmt::format("line {}: missing string key \"{}\"", line_no, key), line_no);
    }
    r.input = j["input"].get<std::string>();
    r.reference = j["reference"].get<std::string>();
    r.prediction = j["prediction"].get<std::string>();
    if (auto it = j.find("error"); it != j.end() && it->is_string()) r.error = it->get<std::string>();
    if (auto it = j.find("attempts"); it != j.end() && it->is_number_integer()) r.attempts = it->get<int>();
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PredictionRecord> read_predictions(const std::string& path) {
  return read_predictions_text(read_file(path));
}

}  // namespace velvet
