#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sse/datamodel.hpp"

namespace sse {

struct RetrievalHit {
  std::size_t position;  // into the dataset
  std::string scene_id;
  double similarity;

  bool operator==(const RetrievalHit&) const = default;
};

// Exact scan: scenes with a semantic row ranked by descending cosine to the
// query, ties to canonical order. Returns at most top_n hits.
std::vector<RetrievalHit> retrieve(const Dataset& ds, std::span<const float> query,
                                   std::size_t top_n);

Json hits_to_json(const Dataset& ds, const std::vector<RetrievalHit>& hits);

}  // namespace sse
