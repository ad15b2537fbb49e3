#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "velvet/formulation.hpp"

namespace velvet {

struct RankedExcipient {
  std::string name;
  std::string key;
  std::size_t count = 0;  // formulations where it co-occurs (or appears, globally)
  double median = 0.0;    // median w/w% over those formulations
};

struct ApiProfile {
  std::string name;
  std::size_t n_formulations = 0;
  std::vector<RankedExcipient> ranked;  // count desc, then name
  Printability modal_printable = Printability::Unknown;
  FilamentAspect modal_aspect = FilamentAspect::Unknown;
};

/// Co-occurrence baseline. Immutable after fit().
struct RecommenderModel {
  std::map<std::string, ApiProfile> apis;  // keyed by normalized API name
  std::vector<RankedExcipient> global;     // fallback for unseen APIs

  std::string to_json() const;
};

/// Throws DomainError on an empty training set.
RecommenderModel fit(std::span<const Formulation> train, const DatasetSchema& schema);

struct Recommendation {
  Formulation formulation;
  bool unseen_api = false;  // UNSEEN_API: global ranking was used
};

/// Top-k excipients with medians rescaled so dose + excipients = 100.
/// Throws DomainError unless 0 < dose < 100 and k >= 1.
Recommendation recommend(const RecommenderModel& model, std::string_view api, double dose,
                         std::size_t k);

}  // namespace velvet
