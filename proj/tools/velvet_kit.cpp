// velvet-kit: formulation dataset -> instruction corpus -> predictions -> metrics.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "velvet/alpaca.hpp"
#include "velvet/embedding.hpp"
#include "velvet/error.hpp"
#include "velvet/formulation.hpp"
#include "velvet/harness.hpp"
#include "velvet/inference_client.hpp"
#include "velvet/io.hpp"
#include "velvet/recommender.hpp"
#include "velvet/text.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace velvet;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return 3;
    case ErrorKind::Schema:
    case ErrorKind::Parse: return 4;
    case ErrorKind::Domain: return 5;
    case ErrorKind::Auth:
    case ErrorKind::Network: return 6;
  }
  return 1;
}

struct DataArgs {
  std::string csv;
  std::string schema;
};

void add_data_args(CLI::App* cmd, DataArgs& args) {
  cmd->add_option("--csv", args.csv, "Wide formulation CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--schema", args.schema, "Schema JSON naming column roles")
      ->required()
      ->check(CLI::ExistingFile);
}

Dataset load(const DataArgs& args, DatasetSchema* schema_out = nullptr) {
  const auto schema = load_schema(args.schema);
  auto data = load_wide_csv(args.csv, schema);
  for (const auto& d : data.diagnostics)
    std::cerr << fmt::format("warning: row {} column '{}': {}\n", d.row, d.column, d.message);
  if (schema_out) *schema_out = schema;
  return data;
}

ordered_json formulation_json(const Formulation& f, const ValidationReport& report) {
  ordered_json comp = ordered_json::object();
  for (const auto& c : f.composition) comp[c.ingredient.name] = c.proportion;
  ordered_json findings = ordered_json::array();
  for (const auto& x : report.findings) findings.push_back({{"code", to_string(x.code)}, {"message", x.message}});
  return {{"id", f.id},
          {"composition", comp},
          {"printable", to_string(f.printable)},
          {"aspect", to_string(f.aspect)},
          {"findings", findings}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"velvet-kit: formulation instruction corpora and VELVET/BLEU/ROUGE evaluation"};
  app.require_subcommand(1);

  // ingest
  DataArgs ingest_args;
  std::string ingest_out;
  double tolerance = -1.0;
  bool strict = false;
  auto* ingest = app.add_subcommand("ingest", "Load and validate a wide CSV");
  add_data_args(ingest, ingest_args);
  ingest->add_option("--out", ingest_out, "Write formulations + findings as JSON");
  ingest->add_option("--tolerance", tolerance, "Sum tolerance in w/w% (default: schema value)");
  ingest->add_flag("--strict", strict, "Exit nonzero when any formulation fails validation");

  // eda
  DataArgs eda_args;
  std::string eda_json;
  std::string eda_csv;
  auto* eda = app.add_subcommand("eda", "Frequency, co-occurrence and aspect statistics");
  add_data_args(eda, eda_args);
  eda->add_option("--json", eda_json, "Write JSON report");
  eda->add_option("--csv-out", eda_csv, "Write CSV report");

  // format
  DataArgs format_args;
  std::string format_out;
  std::string templates_path;
  auto* format = app.add_subcommand("format", "Render Alpaca instruction/response JSONL");
  add_data_args(format, format_args);
  format->add_option("--out", format_out, "Output JSONL")->required();
  format->add_option("--templates", templates_path, "Templates JSON")->check(CLI::ExistingFile);

  // split
  DataArgs split_args;
  SplitSpec split_spec;
  std::string train_out;
  std::string test_out;
  auto* split = app.add_subcommand("split", "Seeded hold-out split into train/test CSVs");
  add_data_args(split, split_args);
  split->add_option("--test-fraction", split_spec.test_fraction, "Fraction held out")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  split->add_option("--seed", split_spec.seed, "Shuffle seed")->capture_default_str();
  split->add_option("--train-out", train_out)->required();
  split->add_option("--test-out", test_out)->required();

  // embed
  DataArgs embed_args;
  std::string embed_out;
  auto* embed = app.add_subcommand("embed", "Build the VELVET co-occurrence embedding from training data");
  add_data_args(embed, embed_args);
  embed->add_option("--out", embed_out, "Embedding JSON")->required();

  // recommend
  DataArgs rec_args;
  std::string rec_api;
  double rec_dose = 0.0;
  std::size_t rec_k = 3;
  std::string rec_model_out;
  auto* rec = app.add_subcommand("recommend", "Co-occurrence baseline recommendation");
  add_data_args(rec, rec_args);
  rec->add_option("--api", rec_api)->required();
  rec->add_option("--dose", rec_dose, "API dose in w/w%")->required();
  rec->add_option("-k", rec_k, "Number of excipients")->capture_default_str();
  rec->add_option("--model-out", rec_model_out, "Write the fitted model as JSON");

  // generate
  std::string gen_pairs;
  std::string gen_out;
  EndpointConfig endpoint;
  double temperature = 0.7;
  double top_p = 0.9;
  int max_new_tokens = 256;
  int timeout_ms = 30000;
  std::string gen_templates;
  auto* gen = app.add_subcommand("generate", "Collect predictions from a text-generation endpoint");
  gen->add_option("--pairs", gen_pairs, "Test JSONL")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "Prediction JSONL")->required();
  gen->add_option("--endpoint", endpoint.url, "Completion URL")->required();
  gen->add_option("--model", endpoint.model, "Model identifier");
  gen->add_option("--temperature", temperature)->capture_default_str();
  gen->add_option("--top-p", top_p)->capture_default_str();
  gen->add_option("--max-new-tokens", max_new_tokens)->capture_default_str();
  gen->add_option("--concurrency", endpoint.max_concurrency)->capture_default_str();
  gen->add_option("--retries", endpoint.max_retries)->capture_default_str();
  gen->add_option("--timeout-ms", timeout_ms)->capture_default_str();
  gen->add_option("--auth-env", endpoint.auth_env, "Environment variable holding a bearer token");
  gen->add_option("--prompt-field", endpoint.prompt_field)->capture_default_str();
  gen->add_option("--max-tokens-field", endpoint.max_tokens_field)->capture_default_str();
  gen->add_option("--response-pointer", endpoint.response_pointer, "JSON pointer to generated text")
      ->capture_default_str();
  gen->add_option("--templates", gen_templates, "Templates JSON (system instruction)")
      ->check(CLI::ExistingFile);

  // evaluate
  std::string eval_embedding;
  std::string eval_run_dir;
  std::string eval_manifest;
  std::string eval_out;
  auto* eval = app.add_subcommand("evaluate", "Score prediction files listed in manifests");
  eval->add_option("--embedding", eval_embedding)->required()->check(CLI::ExistingFile);
  auto* run_opt = eval->add_option("--run-dir", eval_run_dir, "Reads manifests/*.json, writes reports/<id>.json");
  auto* man_opt = eval->add_option("--manifest", eval_manifest)->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out, "Report JSON (with --manifest)");
  run_opt->excludes(man_opt);

  // compare
  std::string cmp_a;
  std::string cmp_b;
  std::string cmp_metric = "all";
  double alpha = 0.05;
  auto* cmp = app.add_subcommand("compare", "Welch t-test between two experiment reports");
  cmp->add_option("--a", cmp_a)->required()->check(CLI::ExistingFile);
  cmp->add_option("--b", cmp_b)->required()->check(CLI::ExistingFile);
  cmp->add_option("--metric", cmp_metric, "rouge1|rouge2|rougeL|velvet|all")->capture_default_str();
  cmp->add_option("--alpha", alpha)->capture_default_str();

  // report
  std::string rep_run_dir;
  std::vector<std::string> rep_compare;
  double rep_alpha = 0.05;
  auto* rep = app.add_subcommand("report", "Render JSON/CSV/table from reports/*.json in a run dir");
  rep->add_option("--run-dir", rep_run_dir)->required()->check(CLI::ExistingDirectory);
  rep->add_option("--compare", rep_compare, "Pairs of experiment ids, as A:B");
  rep->add_option("--alpha", rep_alpha)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ingest) {
      DatasetSchema schema;
      const auto data = load(ingest_args, &schema);
      const double tau = tolerance >= 0.0 ? tolerance : schema.sum_tolerance;
      ordered_json out = ordered_json::array();
      std::size_t failing = 0;
      for (const auto& f : data.formulations) {
        const auto report = validate_formulation(f, tau);
        if (!report.ok()) ++failing;
        out.push_back(formulation_json(f, report));
      }
      if (!ingest_out.empty()) write_file(ingest_out, out.dump(2) + "\n");
      std::cout << fmt::format("{} formulations, {} failing validation (tolerance {})\n",
                               data.formulations.size(), failing, tau);
      return strict && failing ? 5 : 0;
    }
    if (*eda) {
      DatasetSchema schema;
      const auto data = load(eda_args, &schema);
      const auto report = eda_summary(data.formulations, schema);
      if (!eda_json.empty()) write_file(eda_json, eda_to_json(report));
      if (!eda_csv.empty()) write_file(eda_csv, eda_to_csv(report));
      if (eda_json.empty() && eda_csv.empty()) std::cout << eda_to_json(report);
      return 0;
    }
    if (*format) {
      const auto data = load(format_args);
      const PromptTemplates templates = templates_path.empty() ? PromptTemplates{} : load_templates(templates_path);
      std::vector<InstructionPair> pairs;
      std::size_t skipped = 0;
      for (const auto& f : data.formulations) {
        try {
          pairs.push_back(formulation_to_pair(f, templates));
        } catch (const DomainError& e) {
          ++skipped;
          std::cerr << "skipped: " << e.what() << "\n";
        }
      }
      write_jsonl(pairs, format_out);
      std::cout << fmt::format("wrote {} pairs ({} skipped)\n", pairs.size(), skipped);
      return 0;
    }
    if (*split) {
      DatasetSchema schema;
      const auto data = load(split_args, &schema);
      const auto parts = split_holdout(data.formulations, split_spec);
      save_wide_csv(parts.train, schema, train_out);
      save_wide_csv(parts.test, schema, test_out);
      std::cout << fmt::format("train {} / test {}\n", parts.train.size(), parts.test.size());
      return 0;
    }
    if (*embed) {
      const auto data = load(embed_args);
      const auto emb = IngredientEmbedding::build(data.formulations);
      emb.save(embed_out);
      std::cout << fmt::format("{} ingredients x {} formulations, penalty {}{}\n", emb.size(),
                               emb.n_formulations(), format_decimal(emb.penalty()),
                               emb.degenerate() ? " (DEGENERATE_EMBEDDING)" : "");
      return 0;
    }
    if (*rec) {
      DatasetSchema schema;
      const auto data = load(rec_args, &schema);
      const auto model = fit(data.formulations, schema);
      if (!rec_model_out.empty()) write_file(rec_model_out, model.to_json());
      const auto r = recommend(model, rec_api, rec_dose, rec_k);
      if (r.unseen_api) std::cerr << "UNSEEN_API: using global excipient ranking\n";
      std::cout << formulation_to_pair(r.formulation, rec_api).response << "\n";
      return 0;
    }
    if (*gen) {
      endpoint.timeout = std::chrono::milliseconds(timeout_ms);
      const auto params = normalize_params(temperature, top_p, max_new_tokens);
      const auto pairs = read_jsonl(gen_pairs);
      BatchOptions options;
      if (!gen_templates.empty()) options.system_instruction = load_templates(gen_templates).system_instruction;
      options.on_progress = [](std::size_t done, std::size_t total) {
        std::cerr << fmt::format("{}/{} done\n", done, total);
      };
      const auto records = generate_batch(endpoint, params, pairs, options);
      write_predictions(records, gen_out);
      std::size_t failed = 0;
      for (const auto& r : records) failed += r.error ? 1 : 0;
      std::cout << fmt::format("{} predictions, {} failed\n", records.size(), failed);
      return 0;
    }
    if (*eval) {
      const auto emb = IngredientEmbedding::load(eval_embedding);
      if (!eval_run_dir.empty()) {
        const auto reports_dir = fs::path(eval_run_dir) / "reports";
        fs::create_directories(reports_dir);
        for (const auto& m : load_run_manifests(eval_run_dir)) {
          const auto report = evaluate_experiment(m, emb);
          write_file((reports_dir / (m.id + ".json")).string(), report_to_json(report));
          std::cout << fmt::format("{}: n={} BLEU {:.4f} VELVET {:.4f}\n", m.id, report.n_examples,
                                   report.bleu, report.velvet.mean);
        }
        return 0;
      }
      if (eval_manifest.empty()) throw DomainError("evaluate needs --run-dir or --manifest");
      const auto m = load_manifest(eval_manifest, fs::path(eval_manifest).parent_path().string());
      const auto report = evaluate_experiment(m, emb);
      if (!eval_out.empty()) write_file(eval_out, report_to_json(report));
      else std::cout << report_to_json(report);
      return 0;
    }
    if (*cmp) {
      const auto a = report_from_json(read_file(cmp_a));
      const auto b = report_from_json(read_file(cmp_b));
      std::vector<std::string> metrics;
      if (cmp_metric == "all") metrics.assign(std::begin(kComparableMetrics), std::end(kComparableMetrics));
      else metrics.push_back(cmp_metric);
      std::vector<ComparisonResult> results;
      for (const auto& metric : metrics) results.push_back(compare_reports(a, b, metric, alpha));
      std::cout << render_report({}, results).table;
      return 0;
    }
    if (*rep) {
      std::vector<ExperimentReport> reports;
      const auto reports_dir = fs::path(rep_run_dir) / "reports";
      if (fs::is_directory(reports_dir))
        for (const auto& entry : fs::directory_iterator(reports_dir))
          if (entry.path().extension() == ".json")
            reports.push_back(report_from_json(read_file(entry.path().string())));
      std::vector<ComparisonResult> comparisons;
      for (const auto& spec : rep_compare) {
        const auto colon = spec.find(':');
        if (colon == std::string::npos) throw DomainError("--compare expects A:B, got '" + spec + "'");
        const auto find = [&](const std::string& id) -> const ExperimentReport& {
          for (const auto& r : reports)
            if (r.manifest.id == id) return r;
          throw DomainError("no report for experiment '" + id + "'");
        };
        const auto& a = find(spec.substr(0, colon));
        const auto& b = find(spec.substr(colon + 1));
        for (auto metric : kComparableMetrics)
          comparisons.push_back(compare_reports(a, b, metric, rep_alpha));
      }
      const auto rendered = render_report(reports, comparisons);
      write_file((fs::path(rep_run_dir) / "report.json").string(), rendered.json);
      write_file((fs::path(rep_run_dir) / "report.csv").string(), rendered.csv);
      write_file((fs::path(rep_run_dir) / "report.txt").string(), rendered.table);
      std::cout << rendered.table;
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << fmt::format("error [{}]: {}\n", to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error [io]: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
