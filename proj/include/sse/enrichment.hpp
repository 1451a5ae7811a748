#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sse/clustering.hpp"
#include "sse/datamodel.hpp"

namespace sse {

struct Anchor {
  std::string anchor_id;
  std::vector<float> vector;  // unit norm
  AnchorOrigin origin = AnchorOrigin::cluster;
};

struct AnchorSet {
  std::vector<Anchor> anchors;
  AnchorPolicy policy = AnchorPolicy::dynamic;
};

// One anchor per non-empty cluster: the member whose semantic row is closest
// (squared Euclidean) to the centroid, ties to canonical order. The model's
// assignment must be aligned with `scenes`.
AnchorSet anchors_from_clusters(const ClusterModel& model, const Dataset& scenes,
                                AnchorPolicy policy = AnchorPolicy::dynamic);

struct EnrichmentResult {
  Dataset enriched;  // selected ++ additions, additions tagged source="pool"
  EnrichmentReport report;
  std::vector<std::size_t> added_positions;  // into the pool, step order
};

// Farthest-point enrichment. Each step scores every remaining pool scene by
// its cosine distance to the nearest anchor and adds the maximum (ties to
// canonical order). Under the dynamic policy each added scene becomes an
// anchor for later steps.
EnrichmentResult enrich(const Dataset& selected, const Dataset& pool, const AnchorSet& anchors,
                        std::size_t budget);

}  // namespace sse
