#include <gtest/gtest.h>

#include <random>
#include <set>

#include "../support/fixtures.hpp"
#include "../support/golden.hpp"
#include "velvet/alpaca.hpp"
#include "velvet/error.hpp"

namespace velvet {
namespace {

using testing::API;
using testing::EXC;
using testing::make_formulation;

TEST(FormulationToPair, CiprofloxacinGolden) {
  const auto f = make_formulation("1", {{"Ciprofloxacin", 20, API}, {"PCL", 60, EXC}, {"PEG2000", 20, EXC}},
                                  Printability::Yes, FilamentAspect::Flexible, "flexible");
  const auto pair = formulation_to_pair(f, "Ciprofloxacin");
  EXPECT_EQ(pair.instruction, golden::kTrainInstruction1);
  EXPECT_EQ(pair.input, "");
  EXPECT_EQ(pair.response, golden::kTrainResponse1);
}

TEST(FormulationToPair, TheophyllineGoldenInColumnOrder) {
  const auto f = make_formulation(
      "2", {{"Theophylline", 10, API}, {"HPC", 40, EXC}, {"Eudragit", 40, EXC}, {"PEG6000", 10, EXC}},
      Printability::Yes, FilamentAspect::Good);
  PromptTemplates t;
  t.excipient_order = ExcipientOrder::Column;
  const auto pair = formulation_to_pair(f, "Theophylline", t);
  EXPECT_EQ(pair.instruction, golden::kTrainInstruction2);
  EXPECT_EQ(pair.response, golden::kTrainResponse2);

  // Default ordering is lexicographic.
  EXPECT_NE(formulation_to_pair(f, "Theophylline").response.find("Eudragit: 40 w/w%, HPC: 40 w/w%"),
            std::string::npos);
}

TEST(FormulationToPair, ParacetamolGolden) {
  const auto f = make_formulation("3", {{"Paracetamol", 25, API},
                                        {"Polyethylene glycol PEG8000", 5, EXC},
                                        {"HPMC", 60, EXC},
                                        {"Methyl paraben", 10, EXC}});
  const auto pair = formulation_to_pair(f);
  EXPECT_EQ(pair.instruction, golden::kTrainInstruction3);
  EXPECT_EQ(pair.response, golden::kTrainResponse3);
}

TEST(FormulationToPair, PrintabilityPhrases) {
  auto f = make_formulation("x", {{"A", 10, API}, {"E", 90, EXC}}, Printability::No,
                            FilamentAspect::Brittle);
  EXPECT_NE(render_response(f, {"A"}).find("This is not printable and has a Brittle filament aspect."),
            std::string::npos);
  f.printable = Printability::Unknown;
  f.aspect = FilamentAspect::Unknown;
  EXPECT_NE(render_response(f, {"A"}).find("This is of unknown printability and has a Unknown"),
            std::string::npos);
}

TEST(FormulationToPair, MultipleApisShareOneResponse) {
  const auto f = make_formulation("m", {{"A", 10, API}, {"B", 5.5, API}, {"E", 84.5, EXC}});
  const auto pair = formulation_to_pair(f);
  EXPECT_EQ(pair.instruction, "Recommend excipients for 10 w/w% A and 5.5 w/w% B");
  EXPECT_EQ(pair.response.find("A:"), std::string::npos);
  EXPECT_NE(pair.response.find("E: 84.5 w/w%"), std::string::npos);
}

TEST(FormulationToPair, SeparateInputStyleAndEos) {
  const auto f = make_formulation("s", {{"Drug", 12.5, API}, {"E", 87.5, EXC}});
  PromptTemplates t;
  t.input_style = InputStyle::SeparateInput;
  t.eos_token = "</s>";
  const auto pair = formulation_to_pair(f, t);
  EXPECT_EQ(pair.instruction, t.system_instruction);
  EXPECT_EQ(pair.input, "Drug: 12.5 w/w%");
  EXPECT_TRUE(pair.response.ends_with("filament aspect.</s>"));
}

TEST(FormulationToPair, Errors) {
  const auto f = make_formulation("e", {{"A", 10, API}, {"E", 90, EXC}});
  EXPECT_THROW(formulation_to_pair(f, "Missing"), DomainError);
  EXPECT_THROW(formulation_to_pair(make_formulation("o", {{"A", 100, API}})), DomainError);
  EXPECT_THROW(formulation_to_pair(make_formulation("n", {{"E", 100, EXC}})), DomainError);
  PromptTemplates bad;
  bad.instruction_pattern = "Recommend for {api}";
  EXPECT_THROW(formulation_to_pair(f, bad), DomainError);
}

TEST(Templates, JsonOverrides) {
  const auto t = templates_from_json_text(
      R"({"instruction_pattern":"Excipients for {api} at {dose} w/w%","eos_token":"<eos>",
          "input_style":"separate","excipient_order":"column"})");
  EXPECT_EQ(t.eos_token, "<eos>");
  EXPECT_EQ(t.input_style, InputStyle::SeparateInput);
  EXPECT_EQ(t.excipient_order, ExcipientOrder::Column);
  EXPECT_THROW(templates_from_json_text(R"({"input_style":"other"})"), DomainError);
  EXPECT_THROW(templates_from_json_text("{"), ParseError);

  PromptTemplates inline_style;
  inline_style.instruction_pattern = "Excipients for {api} at {dose} w/w%";
  const auto f = make_formulation("t", {{"A", 10, API}, {"E", 90, EXC}});
  EXPECT_EQ(formulation_to_pair(f, inline_style).instruction, "Excipients for A at 10 w/w%");
}

TEST(SplitHoldout, Sizes) {
  const auto data = testing::synthetic_dataset(1, 10);
  EXPECT_EQ(split_holdout(data, {0.2, 42}).test.size(), 2u);
  EXPECT_EQ(split_holdout(data, {0.0, 42}).test.size(), 0u);
  EXPECT_EQ(split_holdout(data, {1.0, 42}).train.size(), 0u);
  EXPECT_THROW(split_holdout(data, {1.5, 42}), DomainError);
  EXPECT_THROW(split_holdout(data, {-0.1, 42}), DomainError);
}

TEST(SplitHoldout, PartitionProperty) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = rng() % 1001;
    const double fraction = static_cast<double>(rng() % 1001) / 1000.0;
    const std::uint64_t seed = rng();
    const auto idx = holdout_indices(n, {fraction, seed});
    EXPECT_EQ(idx.size(), static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
    EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
    EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), idx.size());
    if (!idx.empty()) {
      EXPECT_LT(idx.back(), n);
    }
    EXPECT_EQ(idx, holdout_indices(n, {fraction, seed}));
  }
}

TEST(SplitHoldout, HalvesKeepDatasetOrderAndCoverDataset) {
  const auto data = testing::synthetic_dataset(2, 137);
  const auto split = split_holdout(data, {0.3, 7});
  EXPECT_EQ(split.train.size() + split.test.size(), data.size());
  auto ids_ascending = [](const std::vector<Formulation>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (std::stoul(v[i - 1].id) >= std::stoul(v[i].id)) return false;
    return true;
  };
  EXPECT_TRUE(ids_ascending(split.train));
  EXPECT_TRUE(ids_ascending(split.test));
  std::set<std::string> ids;
  for (const auto& f : split.train) ids.insert(f.id);
  for (const auto& f : split.test) ids.insert(f.id);
  EXPECT_EQ(ids.size(), data.size());
}

TEST(SplitHoldout, DifferentSeedsDiffer) {
  EXPECT_NE(holdout_indices(100, {0.2, 1}), holdout_indices(100, {0.2, 2}));
}

TEST(Jsonl, RoundTripsIncludingEscapes) {
  std::vector<InstructionPair> pairs = {
      {"Recommend excipients for 20 w/w% Ciprofloxacin", "", std::string(golden::kTrainResponse1)},
      {"quote \" and \\ backslash", "tab\tnew\nline", "unicode \xc3\xa9 ok"},
  };
  const auto text = write_jsonl(pairs);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(text.find("{\"instruction\":"), 0u);
  EXPECT_EQ(read_jsonl_text(text), pairs);
}

TEST(Jsonl, MissingKeyNamesLineAndKey) {
  const std::string text =
      "{\"instruction\":\"a\",\"input\":\"\",\"response\":\"r\"}\n"
      "{\"instruction\":\"a\",\"response\":\"r\"}\n";
  try {
    read_jsonl_text(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("\"input\""), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_jsonl_text("not json\n"), ParseError);
}

TEST(Jsonl, RandomFormulationsRoundTrip) {
  std::mt19937_64 rng(11);
  std::vector<InstructionPair> pairs;
  for (std::size_t i = 0; i < 200; ++i) pairs.push_back(formulation_to_pair(testing::random_formulation(rng, i)));
  EXPECT_EQ(read_jsonl_text(write_jsonl(pairs)), pairs);
}

}  // namespace
}  // namespace velvet
