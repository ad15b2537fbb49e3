#include <gtest/gtest.h>

#include <random>

#include "../support/baseline_experiment.hpp"
#include "../support/fixtures.hpp"
#include "velvet/error.hpp"
#include "velvet/recommender.hpp"

namespace velvet {
namespace {

using testing::API;
using testing::EXC;
using testing::make_formulation;

DatasetSchema xy_schema() {
  DatasetSchema s;
  s.api_columns = {"X", "Y"};
  s.excipient_columns = {"E", "E2", "F", "G"};
  return s;
}

TEST(Fit, RanksByCoOccurrence) {
  const std::vector<Formulation> train = {
      make_formulation("1", {{"X", 20, API}, {"E", 60, EXC}, {"F", 20, EXC}}, Printability::Yes,
                       FilamentAspect::Good),
      make_formulation("2", {{"X", 20, API}, {"E", 40, EXC}, {"G", 40, EXC}}, Printability::Yes,
                       FilamentAspect::Brittle),
      make_formulation("3", {{"Y", 10, API}, {"E2", 90, EXC}}, Printability::No, FilamentAspect::Brittle),
  };
  const auto model = fit(train, xy_schema());
  const auto& x = model.apis.at("x");
  EXPECT_EQ(x.n_formulations, 2u);
  ASSERT_EQ(x.ranked.size(), 3u);
  EXPECT_EQ(x.ranked[0].name, "E");
  EXPECT_EQ(x.ranked[0].count, 2u);
  EXPECT_EQ(x.ranked[0].median, 50.0);
  EXPECT_EQ(x.ranked[1].name, "F");
  EXPECT_EQ(x.ranked[2].name, "G");
  for (const auto& r : x.ranked) EXPECT_NE(r.key, "e2");
  EXPECT_EQ(x.modal_printable, Printability::Yes);
  EXPECT_EQ(x.modal_aspect, FilamentAspect::Good);  // tie broken by enum order
  EXPECT_EQ(model.apis.at("y").modal_printable, Printability::No);

  EXPECT_EQ(model.global[0].name, "E");
  EXPECT_EQ(model.global[0].count, 2u);
  EXPECT_NE(model.to_json().find("\"velvet-recommender\""), std::string::npos);
}

TEST(Fit, SchemaDecidesKind) {
  // Kind on the component is wrong; the schema registry wins.
  const std::vector<Formulation> train = {make_formulation("1", {{"X", 20, EXC}, {"E", 80, API}})};
  const auto model = fit(train, xy_schema());
  EXPECT_TRUE(model.apis.count("x"));
  EXPECT_FALSE(model.apis.count("e"));
}

TEST(Fit, EmptyTrainingSet) {
  EXPECT_THROW(fit(std::vector<Formulation>{}, xy_schema()), DomainError);
}

TEST(Recommend, SingleExcipientRescaled) {
  const std::vector<Formulation> train = {make_formulation("1", {{"X", 40, API}, {"E", 60, EXC}})};
  const auto rec = recommend(fit(train, xy_schema()), "X", 20, 1);
  EXPECT_FALSE(rec.unseen_api);
  ASSERT_EQ(rec.formulation.composition.size(), 2u);
  EXPECT_EQ(rec.formulation.find("E")->proportion, 80.0);
  EXPECT_EQ(rec.formulation.find("X")->proportion, 20.0);
}

TEST(Recommend, TwoEqualMedians) {
  const std::vector<Formulation> train = {make_formulation("1", {{"X", 20, API}, {"E", 40, EXC}, {"F", 40, EXC}})};
  const auto rec = recommend(fit(train, xy_schema()), "X", 10, 2);
  EXPECT_EQ(rec.formulation.find("E")->proportion, 45.0);
  EXPECT_EQ(rec.formulation.find("F")->proportion, 45.0);
}

TEST(Recommend, UnseenApiUsesGlobalRanking) {
  const std::vector<Formulation> train = {
      make_formulation("1", {{"X", 20, API}, {"E", 80, EXC}}),
      make_formulation("2", {{"X", 20, API}, {"E", 40, EXC}, {"F", 40, EXC}}),
  };
  const auto rec = recommend(fit(train, xy_schema()), "Novel drug", 30, 1);
  EXPECT_TRUE(rec.unseen_api);
  EXPECT_EQ(rec.formulation.printable, Printability::Unknown);
  EXPECT_EQ(rec.formulation.aspect, FilamentAspect::Unknown);
  EXPECT_EQ(rec.formulation.composition[1].ingredient.name, "E");
  EXPECT_EQ(rec.formulation.composition[1].proportion, 70.0);
}

TEST(Recommend, DoseAndKErrors) {
  const std::vector<Formulation> train = {make_formulation("1", {{"X", 40, API}, {"E", 60, EXC}})};
  const auto model = fit(train, xy_schema());
  EXPECT_THROW(recommend(model, "X", 0, 1), DomainError);
  EXPECT_THROW(recommend(model, "X", 100, 1), DomainError);
  EXPECT_THROW(recommend(model, "X", -5, 1), DomainError);
  EXPECT_THROW(recommend(model, "X", std::nan(""), 1), DomainError);
  EXPECT_THROW(recommend(model, "X", 10, 0), DomainError);
}

TEST(Recommend, AlwaysSumsToExactlyHundred) {
  std::mt19937_64 rng(79);
  const auto data = testing::synthetic_dataset(5, 300);
  const auto model = fit(data, DatasetSchema{});
  for (int i = 0; i < 2000; ++i) {
    const std::string api = "Drug " + std::to_string(rng() % 10);
    const double dose = std::uniform_real_distribution<double>(0.01, 99.99)(rng);
    const auto rec = recommend(model, api, dose, 1 + rng() % 8);
    EXPECT_EQ(rec.formulation.total(), 100.0) << api << " " << dose;
    EXPECT_TRUE(validate_formulation(rec.formulation, 1e-9).ok());
    for (const auto& c : rec.formulation.composition) EXPECT_GT(c.proportion, 0.0);
  }
}

TEST(Recommend, BeatsRandomPickerOnStructuredData) {
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto outcome = testing::run_baseline_experiment(seed);
    if (outcome.recommender < outcome.random) ++wins;
  }
  EXPECT_GE(wins, 9);
}

}  // namespace
}  // namespace velvet
