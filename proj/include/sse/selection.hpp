#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sse/clustering.hpp"
#include "sse/datamodel.hpp"

namespace sse {

struct PrunedMember {
  std::size_t position;         // dataset position of the pruned scene
  std::size_t keeper_position;  // dataset position of the scene that pruned it
  double similarity;            // visual cosine between the two
};

struct ClusterPrune {
  std::vector<std::size_t> kept;  // dataset positions, canonical order
  std::vector<PrunedMember> pruned;
};

// Greedy visual dedup over one cluster. `members` are dataset positions in
// canonical order. Each member not yet removed is kept and removes every later
// surviving member j with 1 - cos(v_i, v_j) < epsilon.
ClusterPrune greedy_prune_cluster(const Dataset& ds, std::span<const std::size_t> members,
                                  double epsilon);

// Prunes every cluster; clusters are independent. Members without a visual
// row are kept as-is and left out of the greedy pass.
namespace serial {
std::vector<ClusterPrune> prune_clusters(const Dataset& ds,
                                         const std::vector<std::vector<std::size_t>>& clusters,
                                         double epsilon);
}  // namespace serial
namespace omp {
std::vector<ClusterPrune> prune_clusters(const Dataset& ds,
                                         const std::vector<std::vector<std::size_t>>& clusters,
                                         double epsilon);
}  // namespace omp

struct SelectionResult {
  Dataset selected;
  SelectionReport report;
  ClusterModel model;
  std::vector<std::size_t> kept_positions;  // into the input dataset
};

// Which embedding the clusters are fitted on. Visual reproduces the
// image-embedding baseline with otherwise identical pruning.
enum class ClusterSpace { semantic, visual };

struct SelectOptions {
  SelectionParams params;
  std::uint32_t max_iters = 100;
  double tol = 1e-4;
  std::uint32_t restarts = 4;
  ClusterSpace space = ClusterSpace::semantic;
};

// Cluster once, then prune per cluster on visual rows.
SelectionResult select(const Dataset& ds, const SelectOptions& opts);

// Same pruning over an existing clustering (assignment aligned with ds).
SelectionResult select_with_model(const Dataset& ds, const ClusterModel& model,
                                  const SelectionParams& params);

// Matrix the clusters are fitted on, gathered in canonical scene order.
EmbeddingMatrix clustering_rows(const Dataset& ds, ClusterSpace space);

// ceil(fraction * n), guarded against representation error in the product.
std::size_t keep_count(double fraction, std::size_t n);

// Uniform sample of keep_count(fraction, n) scenes, canonical order kept.
std::vector<std::size_t> random_select(const Dataset& ds, double fraction, std::uint64_t seed);

// Repeat factor sampling. Class frequency f(c) is the fraction of scenes with
// at least one instance of c; r(c) = max(1, sqrt(t / f(c))); a scene scores
// the max r(c) over its present classes (1 when none).
std::vector<double> rfs_scores(const Dataset& ds, double t);

// Top keep_count(fraction, n) scenes by RFS score. Ties are broken by the same
// seeded permutation random_select uses, then canonical order. Returned in
// canonical order.
std::vector<std::size_t> rfs_select(const Dataset& ds, double fraction, double t,
                                    std::uint64_t seed);
// Full ranking (best first) behind rfs_select.
std::vector<std::size_t> rfs_ranking(const Dataset& ds, double t, std::uint64_t seed);

}  // namespace sse
