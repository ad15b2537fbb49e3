#include "velvet/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "velvet/csv.hpp"
#include "velvet/error.hpp"
#include "velvet/io.hpp"
#include "velvet/text.hpp"

namespace velvet {

using nlohmann::json;

Ingredient Ingredient::make(std::string_view name, IngredientKind kind) {
  Ingredient ing;
  ing.name = std::string(trim(name));
  ing.key = normalize_text(name);
  ing.kind = kind;
  if (ing.key.empty())
    throw DomainError(fmt::format("ingredient name '{}' is empty after normalization", name));
  return ing;
}

const char* to_string(FilamentAspect aspect) {
  switch (aspect) {
    case FilamentAspect::Good: return "Good";
    case FilamentAspect::Flexible: return "Flexible";
    case FilamentAspect::Brittle: return "Brittle";
    case FilamentAspect::Unextrudable: return "Unextrudable";
    case FilamentAspect::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::optional<FilamentAspect> parse_aspect(std::string_view label) {
  label = trim(label);
  for (FilamentAspect a : kAllAspects)
    if (iequals(label, to_string(a))) return a;
  return std::nullopt;
}

const char* to_string(Printability p) {
  switch (p) {
    case Printability::Yes: return "yes";
    case Printability::No: return "no";
    case Printability::Unknown: return "unknown";
  }
  return "unknown";
}

std::optional<Printability> parse_printability(std::string_view cell) {
  cell = trim(cell);
  for (std::string_view y : {"yes", "true", "1"})
    if (iequals(cell, y)) return Printability::Yes;
  for (std::string_view n : {"no", "false", "0"})
    if (iequals(cell, n)) return Printability::No;
  return std::nullopt;
}

const Component* Formulation::find(std::string_view name) const {
  const std::string key = normalize_text(name);
  for (const auto& c : composition)
    if (c.ingredient.key == key) return &c;
  return nullptr;
}

double Formulation::total() const {
  double sum = 0.0;
  for (const auto& c : composition) sum += c.proportion;
  return sum;
}

std::string_view Formulation::aspect_text() const {
  if (!aspect_label.empty()) return aspect_label;
  return to_string(aspect);
}

std::vector<const Component*> Formulation::of_kind(IngredientKind kind) const {
  std::vector<const Component*> out;
  for (const auto& c : composition)
    if (c.ingredient.kind == kind) out.push_back(&c);
  return out;
}

// ---------------------------------------------------------------------------
// Schema

void DatasetSchema::check() const {
  if (schema_version != kSchemaVersion)
    throw SchemaError(fmt::format("unsupported schema_version {} (expected {})",
                                  schema_version, kSchemaVersion));
  std::set<std::string> seen;
  auto claim = [&](const std::string& col, const char* role) {
    if (col.empty()) throw SchemaError(fmt::format("empty column name in {}", role));
    if (!seen.insert(col).second)
      throw SchemaError(fmt::format("column '{}' is assigned more than one role", col));
  };
  for (const auto& c : api_columns) claim(c, "api_columns");
  for (const auto& c : excipient_columns) claim(c, "excipient_columns");
  claim(aspect_column, "aspect_column");
  claim(printability_column, "printability_column");
  if (id_column) claim(*id_column, "id_column");
  if (!(sum_tolerance >= 0.0) || !std::isfinite(sum_tolerance))
    throw SchemaError("sum_tolerance must be a finite non-negative number");
}

std::optional<IngredientKind> DatasetSchema::kind_of(std::string_view name) const {
  const std::string key = normalize_text(name);
  for (const auto& c : api_columns)
    if (normalize_text(c) == key) return IngredientKind::Api;
  for (const auto& c : excipient_columns)
    if (normalize_text(c) == key) return IngredientKind::Excipient;
  return std::nullopt;
}

DatasetSchema schema_from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schema is not valid JSON: ") + e.what());
  }
  DatasetSchema s;
  try {
    if (!j.contains("schema_version")) throw SchemaError("schema is missing 'schema_version'");
    s.schema_version = j.at("schema_version").get<int>();
    s.api_columns = j.at("api_columns").get<std::vector<std::string>>();
    s.excipient_columns = j.at("excipient_columns").get<std::vector<std::string>>();
    s.aspect_column = j.value("aspect_column", s.aspect_column);
    s.printability_column = j.value("printability_column", s.printability_column);
    if (j.contains("id_column") && !j["id_column"].is_null())
      s.id_column = j["id_column"].get<std::string>();
    s.sum_tolerance = j.value("sum_tolerance", s.sum_tolerance);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad schema field: ") + e.what());
  }
  s.check();
  return s;
}

DatasetSchema load_schema(const std::string& path) {
  return schema_from_json_text(read_file(path));
}

std::string schema_to_json_text(const DatasetSchema& schema) {
  json j = {{"schema_version", schema.schema_version},
            {"api_columns", schema.api_columns},
            {"excipient_columns", schema.excipient_columns},
            {"aspect_column", schema.aspect_column},
            {"printability_column", schema.printability_column},
            {"sum_tolerance", schema.sum_tolerance}};
  if (schema.id_column) j["id_column"] = *schema.id_column;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Wide CSV

Dataset read_wide_csv(std::string_view text, const DatasetSchema& schema) {
  schema.check();
  const auto records = csv::parse(text);
  Dataset out;
  if (records.empty()) throw SchemaError("CSV has no header row");

  std::unordered_map<std::string, std::size_t> index;
  const auto& header = records.front().fields;
  for (std::size_t i = 0; i < header.size(); ++i)
    index.emplace(std::string(trim(header[i])), i);

  auto column = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw SchemaError(fmt::format("missing schema column '{}'", name));
    return it->second;
  };

  struct Role {
    std::size_t col;
    Ingredient ingredient;
  };
  std::vector<Role> roles;
  for (const auto& c : schema.api_columns)
    roles.push_back({column(c), Ingredient::make(c, IngredientKind::Api)});
  for (const auto& c : schema.excipient_columns)
    roles.push_back({column(c), Ingredient::make(c, IngredientKind::Excipient)});
  const std::size_t aspect_col = column(schema.aspect_column);
  const std::size_t print_col = column(schema.printability_column);
  std::optional<std::size_t> id_col;
  if (schema.id_column) id_col = column(*schema.id_column);

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t row = r;
    auto cell = [&](std::size_t col) -> std::string_view {
      return col < rec.fields.size() ? trim(rec.fields[col]) : std::string_view{};
    };

    Formulation f;
    f.id = id_col ? std::string(cell(*id_col)) : std::to_string(row);
    for (const auto& role : roles) {
      const auto raw = cell(role.col);
      if (raw.empty()) continue;
      const auto value = parse_number(raw);
      if (!value)
        throw ParseError(fmt::format("row {}: column '{}' has non-numeric proportion '{}'", row,
                                     role.ingredient.name, raw),
                         rec.line);
      if (*value == 0.0) continue;
      f.composition.push_back({role.ingredient, *value});
    }

    const auto aspect_raw = cell(aspect_col);
    if (auto a = parse_aspect(aspect_raw)) {
      f.aspect = *a;
      f.aspect_label = std::string(aspect_raw);
    } else {
      f.aspect = FilamentAspect::Unknown;
      out.diagnostics.push_back({row, schema.aspect_column,
                                 fmt::format("unrecognized filament aspect '{}'", aspect_raw)});
    }

    const auto print_raw = cell(print_col);
    if (auto p = parse_printability(print_raw)) {
      f.printable = *p;
    } else {
      out.diagnostics.push_back({row, schema.printability_column,
                                 fmt::format("unrecognized printability '{}'", print_raw)});
    }
    out.formulations.push_back(std::move(f));
  }
  return out;
}

Dataset load_wide_csv(const std::string& path, const DatasetSchema& schema) {
  return read_wide_csv(read_file(path), schema);
}

std::string write_wide_csv(const std::vector<Formulation>& formulations,
                           const DatasetSchema& schema) {
  std::vector<std::string> header;
  if (schema.id_column) header.push_back(*schema.id_column);
  for (const auto& c : schema.api_columns) header.push_back(c);
  for (const auto& c : schema.excipient_columns) header.push_back(c);
  header.push_back(schema.aspect_column);
  header.push_back(schema.printability_column);

  std::string out;
  csv::append_row(out, header);
  const std::size_t first_ing = schema.id_column ? 1 : 0;
  const std::size_t n_ing = schema.api_columns.size() + schema.excipient_columns.size();
  for (const auto& f : formulations) {
    std::vector<std::string> row(header.size());
    if (schema.id_column) row[0] = f.id;
    for (std::size_t i = 0; i < n_ing; ++i) {
      if (const auto* c = f.find(header[first_ing + i])) row[first_ing + i] = format_decimal(c->proportion);
    }
    row[first_ing + n_ing] = std::string(f.aspect_text());
    row[first_ing + n_ing + 1] = f.printable == Printability::Unknown ? "" : to_string(f.printable);
    csv::append_row(out, row);
  }
  return out;
}

void save_wide_csv(const std::vector<Formulation>& formulations, const DatasetSchema& schema,
                   const std::string& path) {
  write_file(path, write_wide_csv(formulations, schema));
}

// ---------------------------------------------------------------------------
// Validation

const char* to_string(FindingCode code) {
  switch (code) {
    case FindingCode::SumOutOfRange: return "SUM_OUT_OF_RANGE";
    case FindingCode::NegativeProportion: return "NEGATIVE_PROPORTION";
    case FindingCode::EmptyComposition: return "EMPTY_COMPOSITION";
    case FindingCode::UnknownAspect: return "UNKNOWN_ASPECT";
  }
  return "?";
}

bool ValidationReport::has(FindingCode code) const {
  return std::any_of(findings.begin(), findings.end(),
                     [code](const Finding& f) { return f.code == code; });
}

bool ValidationReport::ok() const {
  return std::all_of(findings.begin(), findings.end(), [](const Finding& f) {
    return f.code == FindingCode::UnknownAspect;
  });
}

ValidationReport validate_formulation(const Formulation& f, double sum_tolerance) {
  ValidationReport report;
  if (f.composition.empty()) {
    report.findings.push_back({FindingCode::EmptyComposition, "composition has no entries"});
  }
  for (const auto& c : f.composition) {
    if (!(c.proportion >= 0.0) || !std::isfinite(c.proportion))
      report.findings.push_back(
          {FindingCode::NegativeProportion,
           fmt::format("'{}' has invalid proportion {}", c.ingredient.name, c.proportion)});
  }
  if (!f.composition.empty()) {
    const double total = f.total();
    if (!(total >= 100.0 - sum_tolerance && total <= 100.0 + sum_tolerance))
      report.findings.push_back(
          {FindingCode::SumOutOfRange,
           fmt::format("proportions sum to {} (allowed 100 +/- {})", total, sum_tolerance)});
  }
  if (f.aspect == FilamentAspect::Unknown)
    report.findings.push_back({FindingCode::UnknownAspect, "filament aspect is unknown"});
  return report;
}

// ---------------------------------------------------------------------------
// EDA

EdaReport eda_summary(const std::vector<Formulation>& dataset, const DatasetSchema& schema) {
  EdaReport report;
  report.n_formulations = dataset.size();
  std::map<FilamentAspect, std::size_t> aspect_counts;
  for (const auto& f : dataset) {
    std::vector<const Component*> apis;
    std::vector<const Component*> excipients;
    for (const auto& c : f.composition) {
      const auto kind = schema.kind_of(c.ingredient.name).value_or(c.ingredient.kind);
      (kind == IngredientKind::Api ? apis : excipients).push_back(&c);
    }
    for (const auto* a : apis) ++report.api_counts[a->ingredient.name];
    for (const auto* e : excipients) ++report.excipient_counts[e->ingredient.name];
    for (const auto* a : apis)
      for (const auto* e : excipients) ++report.pair_counts[{a->ingredient.name, e->ingredient.name}];
    ++aspect_counts[f.aspect];
  }
  for (const auto& [aspect, n] : aspect_counts)
    report.aspect_proportions[aspect] =
        static_cast<double>(n) / static_cast<double>(dataset.size());
  return report;
}

std::vector<std::pair<std::string, std::size_t>> ranked(
    const std::map<std::string, std::size_t>& counts) {
  std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

namespace {

std::vector<std::pair<std::pair<std::string, std::string>, std::size_t>> ranked_pairs(
    const EdaReport& report) {
  std::vector<std::pair<std::pair<std::string, std::string>, std::size_t>> out(
      report.pair_counts.begin(), report.pair_counts.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

std::vector<std::pair<FilamentAspect, double>> ranked_aspects(const EdaReport& report) {
  std::vector<std::pair<FilamentAspect, double>> out(report.aspect_proportions.begin(),
                                                     report.aspect_proportions.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return std::string_view(to_string(a.first)) < std::string_view(to_string(b.first));
  });
  return out;
}

}  // namespace

std::string eda_to_json(const EdaReport& report) {
  json j;
  j["n_formulations"] = report.n_formulations;
  j["api_counts"] = json::array();
  for (const auto& [name, n] : ranked(report.api_counts))
    j["api_counts"].push_back({{"name", name}, {"count", n}});
  j["excipient_counts"] = json::array();
  for (const auto& [name, n] : ranked(report.excipient_counts))
    j["excipient_counts"].push_back({{"name", name}, {"count", n}});
  j["pair_counts"] = json::array();
  for (const auto& [pair, n] : ranked_pairs(report))
    j["pair_counts"].push_back({{"api", pair.first}, {"excipient", pair.second}, {"count", n}});
  j["aspect_proportions"] = json::array();
  for (const auto& [aspect, p] : ranked_aspects(report))
    j["aspect_proportions"].push_back({{"aspect", to_string(aspect)}, {"proportion", p}});
  return j.dump(2) + "\n";
}

std::string eda_to_csv(const EdaReport& report) {
  std::string out;
  csv::append_row(out, {"section", "name", "partner", "value"});
  for (const auto& [name, n] : ranked(report.api_counts))
    csv::append_row(out, {"api", name, "", std::to_string(n)});
  for (const auto& [name, n] : ranked(report.excipient_counts))
    csv::append_row(out, {"excipient", name, "", std::to_string(n)});
  for (const auto& [pair, n] : ranked_pairs(report))
    csv::append_row(out, {"pair", pair.first, pair.second, std::to_string(n)});
  for (const auto& [aspect, p] : ranked_aspects(report))
    csv::append_row(out, {"aspect", to_string(aspect), "", format_decimal(p)});
  return out;
}

}  // namespace velvet
