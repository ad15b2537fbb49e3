#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "velvet/embedding.hpp"
#include "velvet/inference_client.hpp"
#include "velvet/predictions.hpp"
#include "velvet/stats.hpp"

namespace velvet {

/// Training hyperparameters are metadata only; generation parameters are
/// validated with the do-sample rule.
struct ExperimentManifest {
  std::string id;
  std::optional<double> learning_rate;
  std::vector<std::string> lora_layers;  // subset of Q, V, K, O
  double temperature = 0.7;
  double top_p = 0.9;
  std::string model_name;
  std::string prediction_file;

  /// Throws DomainError on unknown LoRA layers, out-of-range generation
  /// parameters or an empty id.
  void check() const;
  GenerationParams generation() const;
};

/// Relative prediction_file paths resolve against `base_dir` when given.
ExperimentManifest manifest_from_json_text(std::string_view text, const std::string& base_dir = {});
ExperimentManifest load_manifest(const std::string& path, const std::string& base_dir = {});
std::string manifest_to_json_text(const ExperimentManifest& m);

/// Every manifests/*.json under a run directory, sorted by id; ids must be unique.
std::vector<ExperimentManifest> load_run_manifests(const std::string& run_dir);

struct ExampleScores {
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rouge_l = 0.0;
  double velvet = 0.0;
  std::size_t oov_count = 0;
  bool empty_side = false;
};

struct ExperimentReport {
  ExperimentManifest manifest;
  std::size_t n_examples = 0;
  double bleu = 0.0;
  MeanStd rouge1;
  MeanStd rouge2;
  MeanStd rouge_l;
  MeanStd velvet;
  double penalty = 0.0;
  std::vector<ExampleScores> per_example;
};

inline constexpr std::string_view kComparableMetrics[] = {"rouge1", "rouge2", "rougeL", "velvet"};

/// Per-example values of a comparable metric; DomainError for anything else
/// (BLEU is corpus-level and has no per-example distribution).
std::vector<double> metric_column(const ExperimentReport& report, std::string_view metric);

ExperimentReport evaluate_records(const ExperimentManifest& manifest,
                                  const std::vector<PredictionRecord>& records,
                                  const IngredientEmbedding& embedding);

/// Reads manifest.prediction_file. IoError if unreadable, DomainError if empty.
ExperimentReport evaluate_experiment(const ExperimentManifest& manifest,
                                     const IngredientEmbedding& embedding);

ComparisonResult compare_reports(const ExperimentReport& a, const ExperimentReport& b,
                                 std::string_view metric, double alpha = 0.05);

std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(std::string_view text);

struct RenderedReport {
  std::string json;
  std::string csv;
  std::string table;
};

/// Sorted by manifest id.
RenderedReport render_report(std::vector<ExperimentReport> reports,
                             const std::vector<ComparisonResult>& comparisons);

/// Reads the `reports` array of a rendered JSON report.
std::vector<ExperimentReport> reports_from_rendered_json(std::string_view text);

}  // namespace velvet
