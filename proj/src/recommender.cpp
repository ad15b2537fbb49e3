#include "velvet/recommender.hpp"

#include <algorithm>
#include <array>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "velvet/error.hpp"
#include "velvet/text.hpp"

namespace velvet {

using nlohmann::ordered_json;

namespace {

struct Accumulator {
  std::string name;
  std::vector<double> proportions;
};

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::vector<RankedExcipient> rank(const std::map<std::string, Accumulator>& acc) {
  std::vector<RankedExcipient> out;
  for (const auto& [key, a] : acc)
    out.push_back({a.name, key, a.proportions.size(), median_of(a.proportions)});
  std::sort(out.begin(), out.end(), [](const RankedExcipient& x, const RankedExcipient& y) {
    if (x.count != y.count) return x.count > y.count;
    return x.name < y.name;
  });
  return out;
}

template <typename Enum, std::size_t N>
Enum modal(const std::array<std::size_t, N>& counts, const std::array<Enum, N>& order,
           Enum fallback) {
  std::size_t best = 0;
  Enum out = fallback;
  for (std::size_t i = 0; i < N; ++i) {
    if (counts[i] > best) {
      best = counts[i];
      out = order[i];
    }
  }
  return out;
}

constexpr std::array<Printability, 3> kPrintOrder = {Printability::Yes, Printability::No,
                                                     Printability::Unknown};
constexpr std::array<FilamentAspect, 5> kAspectOrder = {
    FilamentAspect::Good, FilamentAspect::Flexible, FilamentAspect::Brittle,
    FilamentAspect::Unextrudable, FilamentAspect::Unknown};

ordered_json ranked_json(const std::vector<RankedExcipient>& ranked) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : ranked)
    arr.push_back({{"name", r.name}, {"count", r.count}, {"median", r.median}});
  return arr;
}

}  // namespace

RecommenderModel fit(std::span<const Formulation> train, const DatasetSchema& schema) {
  if (train.empty()) throw DomainError("cannot fit a recommender on an empty training set");

  struct ApiAcc {
    std::string name;
    std::size_t n = 0;
    std::map<std::string, Accumulator> excipients;
    std::array<std::size_t, 3> printable{};
    std::array<std::size_t, 5> aspect{};
  };
  std::map<std::string, ApiAcc> apis;
  std::map<std::string, Accumulator> global;

  for (const auto& f : train) {
    std::vector<const Component*> api_components;
    std::vector<const Component*> excipients;
    for (const auto& c : f.composition) {
      const auto kind = schema.kind_of(c.ingredient.name).value_or(c.ingredient.kind);
      (kind == IngredientKind::Api ? api_components : excipients).push_back(&c);
    }
    for (const auto* e : excipients) {
      auto& g = global[e->ingredient.key];
      if (g.name.empty()) g.name = e->ingredient.name;
      g.proportions.push_back(e->proportion);
    }
    for (const auto* a : api_components) {
      auto& acc = apis[a->ingredient.key];
      if (acc.name.empty()) acc.name = a->ingredient.name;
      ++acc.n;
      ++acc.printable[static_cast<std::size_t>(
          std::find(kPrintOrder.begin(), kPrintOrder.end(), f.printable) - kPrintOrder.begin())];
      ++acc.aspect[static_cast<std::size_t>(
          std::find(kAspectOrder.begin(), kAspectOrder.end(), f.aspect) - kAspectOrder.begin())];
      for (const auto* e : excipients) {
        auto& ex = acc.excipients[e->ingredient.key];
        if (ex.name.empty()) ex.name = e->ingredient.name;
        ex.proportions.push_back(e->proportion);
      }
    }
  }

  RecommenderModel model;
  model.global = rank(global);
  for (const auto& [key, acc] : apis) {
    ApiProfile p;
    p.name = acc.name;
    p.n_formulations = acc.n;
    p.ranked = rank(acc.excipients);
    p.modal_printable = modal(acc.printable, kPrintOrder, Printability::Unknown);
    p.modal_aspect = modal(acc.aspect, kAspectOrder, FilamentAspect::Unknown);
    model.apis.emplace(key, std::move(p));
  }
  return model;
}

Recommendation recommend(const RecommenderModel& model, std::string_view api, double dose,
                         std::size_t k) {
  if (!(dose > 0.0 && dose < 100.0))
    throw DomainError(fmt::format("dose {} outside (0, 100)", dose));
  if (k == 0) throw DomainError("k must be at least 1");
  const std::string key = normalize_text(api);
  if (key.empty()) throw DomainError("API name is empty");

  Recommendation out;
  const std::vector<RankedExcipient>* ranked = &model.global;
  auto it = model.apis.find(key);
  if (it != model.apis.end() && !it->second.ranked.empty()) {
    ranked = &it->second.ranked;
    out.formulation.printable = it->second.modal_printable;
    out.formulation.aspect = it->second.modal_aspect;
  } else {
    out.unseen_api = it == model.apis.end();
    if (it != model.apis.end()) {
      out.formulation.printable = it->second.modal_printable;
      out.formulation.aspect = it->second.modal_aspect;
    }
  }
  if (ranked->empty()) throw DomainError("model has no excipients to recommend");

  const std::size_t n = std::min(k, ranked->size());
  double median_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) median_sum += (*ranked)[i].median;
  const double budget = 100.0 - dose;

  auto& f = out.formulation;
  f.id = "recommendation";
  f.composition.push_back({Ingredient::make(api, IngredientKind::Api), dose});
  // Running sum in the same order as Formulation::total(), so the last share
  // absorbs every rounding error.
  double running = dose;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = (*ranked)[i];
    const double share = i + 1 == n ? 100.0 - running : r.median * budget / median_sum;
    running += share;
    f.composition.push_back({Ingredient::make(r.name, IngredientKind::Excipient), share});
  }
  return out;
}

std::string RecommenderModel::to_json() const {
  ordered_json j;
  j["format"] = "velvet-recommender";
  j["version"] = 1;
  j["apis"] = ordered_json::array();
  for (const auto& [key, p] : apis) {
    j["apis"].push_back({{"name", p.name},
                         {"key", key},
                         {"n_formulations", p.n_formulations},
                         {"modal_printable", to_string(p.modal_printable)},
                         {"modal_aspect", to_string(p.modal_aspect)},
                         {"excipients", ranked_json(p.ranked)}});
  }
  j["global"] = ranked_json(global);
  return j.dump(2) + "\n";
}

}  // namespace velvet
