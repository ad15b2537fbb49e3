#include "velvet/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "velvet/csv.hpp"
#include "velvet/error.hpp"
#include "velvet/io.hpp"
#include "velvet/response_parser.hpp"
#include "velvet/text.hpp"
#include "velvet/text_metrics.hpp"

namespace velvet {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Manifests

void ExperimentManifest::check() const {
  if (id.empty()) throw DomainError("manifest id is empty");
  static const std::set<std::string> kLayers = {"Q", "V", "K", "O"};
  std::set<std::string> seen;
  for (const auto& l : lora_layers) {
    if (!kLayers.count(l)) throw DomainError(fmt::format("manifest {}: unknown LoRA layer '{}'", id, l));
    if (!seen.insert(l).second) throw DomainError(fmt::format("manifest {}: LoRA layer '{}' repeated", id, l));
  }
  if (learning_rate && !(*learning_rate > 0.0))
    throw DomainError(fmt::format("manifest {}: learning rate must be positive", id));
  normalize_params(temperature, top_p);
}

GenerationParams ExperimentManifest::generation() const {
  return normalize_params(temperature, top_p);
}

ExperimentManifest manifest_from_json_text(std::string_view text, const std::string& base_dir) {
  ExperimentManifest m;
  try {
    const auto j = ordered_json::parse(text);
    m.id = j.at("id").get<std::string>();
    if (j.contains("learning_rate") && !j["learning_rate"].is_null())
      m.learning_rate = j["learning_rate"].get<double>();
    m.lora_layers = j.value("lora_layers", std::vector<std::string>{});
    m.temperature = j.value("temperature", m.temperature);
    m.top_p = j.value("top_p", m.top_p);
    m.model_name = j.value("model_name", std::string());
    m.prediction_file = j.at("prediction_file").get<std::string>();
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("bad manifest: ") + e.what());
  }
  if (!base_dir.empty() && fs::path(m.prediction_file).is_relative())
    m.prediction_file = (fs::path(base_dir) / m.prediction_file).string();
  m.check();
  return m;
}

ExperimentManifest load_manifest(const std::string& path, const std::string& base_dir) {
  return manifest_from_json_text(read_file(path), base_dir);
}

namespace {

ordered_json manifest_json(const ExperimentManifest& m) {
  ordered_json j;
  j["id"] = m.id;
  j["learning_rate"] = m.learning_rate ? ordered_json(*m.learning_rate) : ordered_json(nullptr);
  j["lora_layers"] = m.lora_layers;
  j["temperature"] = m.temperature;
  j["top_p"] = m.top_p;
  j["model_name"] = m.model_name;
  j["prediction_file"] = m.prediction_file;
  return j;
}

}  // namespace

std::string manifest_to_json_text(const ExperimentManifest& m) {
  return manifest_json(m).dump(2) + "\n";
}

std::vector<ExperimentManifest> load_run_manifests(const std::string& run_dir) {
  const fs::path dir = fs::path(run_dir) / "manifests";
  if (!fs::is_directory(dir)) throw IoError(fmt::format("'{}' is not a directory", dir.string()));
  std::vector<ExperimentManifest> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    out.push_back(load_manifest(entry.path().string(), run_dir));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].id == out[i - 1].id)
      throw DomainError(fmt::format("manifest id '{}' is not unique", out[i].id));
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

std::vector<double> metric_column(const ExperimentReport& report, std::string_view metric) {
  double ExampleScores::*field = nullptr;
  if (metric == "rouge1") field = &ExampleScores::rouge1;
  else if (metric == "rouge2") field = &ExampleScores::rouge2;
  else if (metric == "rougeL") field = &ExampleScores::rouge_l;
  else if (metric == "velvet") field = &ExampleScores::velvet;
  else throw DomainError(fmt::format("metric '{}' has no per-example values (use rouge1, rouge2, rougeL or velvet)", metric));
  std::vector<double> out;
  out.reserve(report.per_example.size());
  for (const auto& e : report.per_example) out.push_back(e.*field);
  return out;
}

ExperimentReport evaluate_records(const ExperimentManifest& manifest,
                                  const std::vector<PredictionRecord>& records,
                                  const IngredientEmbedding& embedding) {
  if (records.empty())
    throw DomainError(fmt::format("experiment {}: prediction file has no lines", manifest.id));
  ExperimentReport report;
  report.manifest = manifest;
  report.n_examples = records.size();
  report.penalty = embedding.penalty();

  BleuStats bleu;
  for (const auto& r : records) {
    const TokenSequence ref = tokenize(r.reference);
    const TokenSequence pred = tokenize(r.prediction);
    bleu.add(ref, pred);
    ExampleScores s;
    s.rouge1 = rouge_n(ref, pred, 1).f1;
    s.rouge2 = rouge_n(ref, pred, 2).f1;
    s.rouge_l = rouge_l(ref, pred).f1;
    const auto v = velvet_score(parse_response(r.prediction), parse_response(r.reference), embedding);
    s.velvet = v.score;
    s.oov_count = v.oov_count;
    s.empty_side = v.empty_side;
    report.per_example.push_back(s);
  }
  report.bleu = bleu.score();
  report.rouge1 = mean_std(metric_column(report, "rouge1"));
  report.rouge2 = mean_std(metric_column(report, "rouge2"));
  report.rouge_l = mean_std(metric_column(report, "rougeL"));
  report.velvet = mean_std(metric_column(report, "velvet"));
  return report;
}

ExperimentReport evaluate_experiment(const ExperimentManifest& manifest,
                                     const IngredientEmbedding& embedding) {
  return evaluate_records(manifest, read_predictions(manifest.prediction_file), embedding);
}

ComparisonResult compare_reports(const ExperimentReport& a, const ExperimentReport& b,
                                 std::string_view metric, double alpha) {
  const auto xa = metric_column(a, metric);
  const auto xb = metric_column(b, metric);
  auto result = welch_ttest(xa, xb, alpha, std::string(metric));
  result.a_label = a.manifest.id;
  result.b_label = b.manifest.id;
  return result;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

ordered_json stat_json(const MeanStd& s) { return {{"mean", s.mean}, {"std", s.std}}; }

MeanStd stat_from(const ordered_json& j, std::size_t n) {
  return MeanStd{j.at("mean").get<double>(), j.at("std").get<double>(), n};
}

ordered_json report_json(const ExperimentReport& r) {
  ordered_json j;
  j["manifest"] = manifest_json(r.manifest);
  j["n_examples"] = r.n_examples;
  j["bleu"] = r.bleu;
  j["rouge1"] = stat_json(r.rouge1);
  j["rouge2"] = stat_json(r.rouge2);
  j["rougeL"] = stat_json(r.rouge_l);
  j["velvet"] = stat_json(r.velvet);
  j["penalty"] = r.penalty;
  j["per_example"] = ordered_json::array();
  for (const auto& e : r.per_example)
    j["per_example"].push_back({{"rouge1", e.rouge1},
                                {"rouge2", e.rouge2},
                                {"rougeL", e.rouge_l},
                                {"velvet", e.velvet},
                                {"oov_count", e.oov_count},
                                {"empty_side", e.empty_side}});
  return j;
}

ExperimentReport report_from(const ordered_json& j) {
  ExperimentReport r;
  r.manifest = manifest_from_json_text(j.at("manifest").dump());
  r.n_examples = j.at("n_examples").get<std::size_t>();
  r.bleu = j.at("bleu").get<double>();
  r.rouge1 = stat_from(j.at("rouge1"), r.n_examples);
  r.rouge2 = stat_from(j.at("rouge2"), r.n_examples);
  r.rouge_l = stat_from(j.at("rougeL"), r.n_examples);
  r.velvet = stat_from(j.at("velvet"), r.n_examples);
  r.penalty = j.at("penalty").get<double>();
  for (const auto& e : j.at("per_example")) {
    ExampleScores s;
    s.rouge1 = e.at("rouge1").get<double>();
    s.rouge2 = e.at("rouge2").get<double>();
    s.rouge_l = e.at("rougeL").get<double>();
    s.velvet = e.at("velvet").get<double>();
    s.oov_count = e.value("oov_count", std::size_t{0});
    s.empty_side = e.value("empty_side", false);
    r.per_example.push_back(s);
  }
  return r;
}

ordered_json comparison_json(const ComparisonResult& c) {
  return {{"metric", c.metric},         {"a", c.a_label},
          {"b", c.b_label},             {"mean_a", c.mean_a},
          {"mean_b", c.mean_b},         {"t_statistic", c.t_statistic},
          {"degrees_of_freedom", c.degrees_of_freedom},
          {"p_value", c.p_value},       {"alpha", c.alpha},
          {"significant", c.significant}};
}

std::string join_layers(const std::vector<std::string>& layers) {
  std::string out;
  for (const auto& l : layers) out += l;
  return out;
}

std::string fmt_real(double x) { return fmt::format("{:.4f}", x); }

}  // namespace

std::string report_to_json(const ExperimentReport& report) { return report_json(report).dump(2) + "\n"; }

ExperimentReport report_from_json(std::string_view text) {
  try {
    return report_from(ordered_json::parse(text));
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("bad report: ") + e.what());
  }
}

std::vector<ExperimentReport> reports_from_rendered_json(std::string_view text) {
  try {
    const auto j = ordered_json::parse(text);
    std::vector<ExperimentReport> out;
    for (const auto& r : j.at("reports")) out.push_back(report_from(r));
    return out;
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("bad rendered report: ") + e.what());
  }
}

RenderedReport render_report(std::vector<ExperimentReport> reports,
                             const std::vector<ComparisonResult>& comparisons) {
  std::sort(reports.begin(), reports.end(),
            [](const auto& a, const auto& b) { return a.manifest.id < b.manifest.id; });
  RenderedReport out;

  ordered_json j;
  j["reports"] = ordered_json::array();
  for (const auto& r : reports) j["reports"].push_back(report_json(r));
  j["comparisons"] = ordered_json::array();
  for (const auto& c : comparisons) j["comparisons"].push_back(comparison_json(c));
  out.json = j.dump(2) + "\n";

  csv::append_row(out.csv, {"id", "model_name", "learning_rate", "lora_layers", "temperature",
                            "top_p", "n_examples", "bleu", "rouge1_mean", "rouge1_std",
                            "rouge2_mean", "rouge2_std", "rougeL_mean", "rougeL_std",
                            "velvet_mean", "velvet_std"});
  for (const auto& r : reports) {
    const auto& m = r.manifest;
    csv::append_row(out.csv,
                    {m.id, m.model_name, m.learning_rate ? format_decimal(*m.learning_rate) : "",
                     join_layers(m.lora_layers), format_decimal(m.temperature),
                     format_decimal(m.top_p), std::to_string(r.n_examples), format_decimal(r.bleu),
                     format_decimal(r.rouge1.mean), format_decimal(r.rouge1.std),
                     format_decimal(r.rouge2.mean), format_decimal(r.rouge2.std),
                     format_decimal(r.rouge_l.mean), format_decimal(r.rouge_l.std),
                     format_decimal(r.velvet.mean), format_decimal(r.velvet.std)});
  }

  out.table += fmt::format("{:<20} {:>6} {:>8} {:>17} {:>17} {:>17} {:>17}\n", "experiment", "n",
                           "BLEU", "ROUGE-1", "ROUGE-2", "ROUGE-L", "VELVET");
  auto pm = [](const MeanStd& s) { return fmt_real(s.mean) + " +/- " + fmt_real(s.std); };
  for (const auto& r : reports)
    out.table += fmt::format("{:<20} {:>6} {:>8} {:>17} {:>17} {:>17} {:>17}\n", r.manifest.id,
                             r.n_examples, fmt_real(r.bleu), pm(r.rouge1), pm(r.rouge2),
                             pm(r.rouge_l), pm(r.velvet));
  if (!comparisons.empty()) {
    out.table += "\nWelch t-tests\n";
    for (const auto& c : comparisons)
      out.table += fmt::format("{:<8} {} vs {}: t = {:.4f}, df = {:.2f}, p = {:.4g}{}\n", c.metric,
                               c.a_label, c.b_label, c.t_statistic, c.degrees_of_freedom,
                               c.p_value, c.significant ? " (significant)" : "");
  }
  return out;
}

}  // namespace velvet
