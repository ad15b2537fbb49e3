#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include "velvet/formulation.hpp"

namespace velvet::testing {

inline Formulation make_formulation(
    std::string id, std::vector<std::tuple<std::string, double, IngredientKind>> parts,
    Printability printable = Printability::Yes, FilamentAspect aspect = FilamentAspect::Good,
    std::string aspect_label = {}) {
  Formulation f;
  f.id = std::move(id);
  for (auto& [name, pct, kind] : parts) f.composition.push_back({Ingredient::make(name, kind), pct});
  f.printable = printable;
  f.aspect = aspect;
  f.aspect_label = std::move(aspect_label);
  return f;
}

inline constexpr auto API = IngredientKind::Api;
inline constexpr auto EXC = IngredientKind::Excipient;

/// Word made of [A-Za-z0-9], first char a letter.
inline std::string random_word(std::mt19937_64& rng) {
  static constexpr char kAlpha[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
  static constexpr char kAlnum[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
  std::uniform_int_distribution<int> len(1, 9);
  std::string w(1, kAlpha[rng() % 52]);
  for (int i = len(rng); i > 0; --i) w.push_back(kAlnum[rng() % 62]);
  return w;
}

inline std::string random_name(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> words(1, 4);
  std::string name = random_word(rng);
  for (int i = words(rng) - 1; i > 0; --i) name += " " + random_word(rng);
  return name;
}

inline double random_proportion(std::mt19937_64& rng) {
  switch (rng() % 3) {
    case 0: return static_cast<double>(1 + rng() % 99);
    case 1: return static_cast<double>(1 + rng() % 9999) / 100.0;
    default: return std::uniform_real_distribution<double>(1e-3, 100.0)(rng);
  }
}

/// Valid for rendering: one API, 1..6 excipients, names with distinct keys.
inline Formulation random_formulation(std::mt19937_64& rng, std::size_t id) {
  Formulation f;
  f.id = std::to_string(id);
  std::set<std::string> keys;
  const std::size_t n_exc = 1 + rng() % 6;
  while (f.composition.size() < n_exc + 1) {
    const auto kind = f.composition.empty() ? IngredientKind::Api : IngredientKind::Excipient;
    auto ing = Ingredient::make(random_name(rng), kind);
    if (!keys.insert(ing.key).second) continue;
    f.composition.push_back({std::move(ing), random_proportion(rng)});
  }
  static constexpr Printability kPrint[] = {Printability::Yes, Printability::No, Printability::Unknown};
  f.printable = kPrint[rng() % 3];
  f.aspect = kAllAspects[rng() % 5];
  if (rng() % 2) {
    std::string label = to_string(f.aspect);
    for (char& c : label)
      if (rng() % 2) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      else c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    f.aspect_label = label;
  }
  return f;
}

/// Structured synthetic dataset: each API draws most excipients from its own
/// pool, so co-occurrence carries signal.
inline std::vector<Formulation> synthetic_dataset(std::uint64_t seed, std::size_t n,
                                                  std::size_t n_apis = 8,
                                                  std::size_t n_excipients = 32,
                                                  std::size_t pool_size = 5) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> pools(n_apis);
  for (auto& pool : pools) {
    std::set<std::size_t> chosen;
    while (chosen.size() < pool_size) chosen.insert(rng() % n_excipients);
    pool.assign(chosen.begin(), chosen.end());
  }
  std::vector<Formulation> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t api = rng() % n_apis;
    const double dose = static_cast<double>(5 + rng() % 36);
    std::set<std::size_t> excipients;
    const std::size_t k = 2 + rng() % 3;
    while (excipients.size() < k) {
      if (rng() % 100 < 85) excipients.insert(pools[api][rng() % pool_size]);
      else excipients.insert(rng() % n_excipients);
    }
    Formulation f;
    f.id = std::to_string(i + 1);
    f.composition.push_back({Ingredient::make("Drug " + std::to_string(api), IngredientKind::Api), dose});
    double left = 100.0 - dose;
    std::size_t j = 0;
    for (auto e : excipients) {
      const double share = ++j == excipients.size() ? left : std::floor(left / 2.0);
      left -= share;
      f.composition.push_back(
          {Ingredient::make("Excipient " + std::to_string(e), IngredientKind::Excipient), share});
    }
    f.printable = rng() % 4 ? Printability::Yes : Printability::No;
    f.aspect = kAllAspects[rng() % 5];
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace velvet::testing
