#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace velvet {

enum class IngredientKind { Api, Excipient };

struct Ingredient {
  std::string name;  // display form, original casing
  std::string key;   // normalize_text(name), used for every join
  IngredientKind kind = IngredientKind::Excipient;

  /// Throws DomainError when the name normalizes to an empty key.
  static Ingredient make(std::string_view name, IngredientKind kind);
};

enum class FilamentAspect { Good, Flexible, Brittle, Unextrudable, Unknown };

inline constexpr FilamentAspect kAllAspects[] = {
    FilamentAspect::Good, FilamentAspect::Flexible, FilamentAspect::Brittle,
    FilamentAspect::Unextrudable, FilamentAspect::Unknown};

const char* to_string(FilamentAspect aspect);

/// Case-insensitive label lookup; nullopt for anything unrecognized.
std::optional<FilamentAspect> parse_aspect(std::string_view label);

enum class Printability { Yes, No, Unknown };

const char* to_string(Printability p);

/// Accepts yes/no/true/false/1/0 in any case.
std::optional<Printability> parse_printability(std::string_view cell);

struct Component {
  Ingredient ingredient;
  double proportion = 0.0;  // w/w%
};

struct Formulation {
  std::string id;
  std::vector<Component> composition;
  Printability printable = Printability::Unknown;
  FilamentAspect aspect = FilamentAspect::Unknown;
  // Spelling of the aspect as it appeared in the source data ("flexible",
  // "Good"); empty means use to_string(aspect).
  std::string aspect_label;

  const Component* find(std::string_view name) const;
  double total() const;
  std::string_view aspect_text() const;
  std::vector<const Component*> of_kind(IngredientKind kind) const;
};

struct DatasetSchema {
  int schema_version = 1;
  std::vector<std::string> api_columns;
  std::vector<std::string> excipient_columns;
  std::string aspect_column = "aspect";
  std::string printability_column = "printable";
  std::optional<std::string> id_column;
  double sum_tolerance = 0.5;

  /// Throws SchemaError on overlapping roles or duplicate columns.
  void check() const;

  /// Registry lookup by normalized key.
  std::optional<IngredientKind> kind_of(std::string_view name) const;
};

inline constexpr int kSchemaVersion = 1;

DatasetSchema load_schema(const std::string& path);
DatasetSchema schema_from_json_text(std::string_view text);
std::string schema_to_json_text(const DatasetSchema& schema);

struct LoadDiagnostic {
  std::size_t row = 0;  // 1-based data row
  std::string column;
  std::string message;
};

struct Dataset {
  std::vector<Formulation> formulations;
  std::vector<LoadDiagnostic> diagnostics;
};

Dataset load_wide_csv(const std::string& path, const DatasetSchema& schema);
Dataset read_wide_csv(std::string_view text, const DatasetSchema& schema);

/// Inverse of read_wide_csv for the schema's columns. Proportions are
/// written in shortest round-trip form, so reloading is bit-exact.
std::string write_wide_csv(const std::vector<Formulation>& formulations,
                           const DatasetSchema& schema);
void save_wide_csv(const std::vector<Formulation>& formulations,
                   const DatasetSchema& schema, const std::string& path);

enum class FindingCode { SumOutOfRange, NegativeProportion, EmptyComposition, UnknownAspect };

const char* to_string(FindingCode code);

struct Finding {
  FindingCode code;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool has(FindingCode code) const;
  /// True when nothing but UNKNOWN_ASPECT was reported.
  bool ok() const;
};

ValidationReport validate_formulation(const Formulation& f, double sum_tolerance = 0.5);

struct EdaReport {
  std::map<std::string, std::size_t> api_counts;
  std::map<std::string, std::size_t> excipient_counts;
  std::map<std::pair<std::string, std::string>, std::size_t> pair_counts;
  std::map<FilamentAspect, double> aspect_proportions;
  std::size_t n_formulations = 0;
};

EdaReport eda_summary(const std::vector<Formulation>& dataset, const DatasetSchema& schema);

/// Descending count, then name.
std::vector<std::pair<std::string, std::size_t>> ranked(
    const std::map<std::string, std::size_t>& counts);

std::string eda_to_json(const EdaReport& report);
std::string eda_to_csv(const EdaReport& report);

}  // namespace velvet
