#include "sse/enrichment.hpp"

#include <cmath>
#include <limits>

#include "sse/error.hpp"
#include "sse/kernels.hpp"

namespace sse {

AnchorSet anchors_from_clusters(const ClusterModel& model, const Dataset& scenes,
                                AnchorPolicy policy) {
  if (model.assignment.size() != scenes.size()) {
    throw Error(ErrorCode::precondition, "cluster assignment does not match scene count");
  }
  if (!scenes.semantic) throw Error(ErrorCode::precondition, "scenes have no semantic matrix");
  if (scenes.semantic->dim() != model.dim) {
    throw Error(ErrorCode::dimension_mismatch, "semantic dim does not match the cluster model");
  }
  const std::size_t none = scenes.size();
  std::vector<std::size_t> best(model.k, none);
  std::vector<double> best_d(model.k, std::numeric_limits<double>::infinity());
  for (std::size_t p = 0; p < scenes.size(); ++p) {
    const auto& s = scenes.scenes[p];
    if (!s.semantic_row) {
      throw Error(ErrorCode::precondition, "scene '" + s.scene_id + "' has no semantic row");
    }
    const std::uint32_t c = model.assignment[p];
    const double d = kernels::squared_distance(scenes.semantic_of(s), model.centroid(c));
    if (d < best_d[c]) {
      best_d[c] = d;
      best[c] = p;
    }
  }
  AnchorSet out;
  out.policy = policy;
  for (std::size_t c = 0; c < model.k; ++c) {
    if (best[c] == none) continue;
    const auto& s = scenes.scenes[best[c]];
    const auto row = scenes.semantic_of(s);
    out.anchors.push_back({s.scene_id, {row.begin(), row.end()}, AnchorOrigin::cluster});
  }
  if (out.anchors.empty()) {
    throw Error(ErrorCode::invariant, "no non-empty clusters to draw anchors from");
  }
  return out;
}

EnrichmentResult enrich(const Dataset& selected, const Dataset& pool, const AnchorSet& anchors,
                        std::size_t budget) {
  if (anchors.anchors.empty()) throw Error(ErrorCode::precondition, "anchor set is empty");
  if (budget > pool.size()) {
    throw Error(ErrorCode::precondition, "budget " + std::to_string(budget) +
                                             " exceeds pool size " +
                                             std::to_string(pool.size()));
  }
  const std::size_t n = pool.size();
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = pool.scenes[i];
    if (!s.semantic_row || !pool.semantic) {
      throw Error(ErrorCode::precondition, "pool scene '" + s.scene_id + "' has no semantic row");
    }
    rows[i] = *s.semantic_row;
  }
  const std::size_t dim = anchors.anchors.front().vector.size();
  for (const auto& a : anchors.anchors) {
    if (a.vector.size() != dim || (n > 0 && dim != pool.semantic->dim())) {
      throw Error(ErrorCode::dimension_mismatch, "anchor '" + a.anchor_id +
                                                     "' does not match the pool dimension");
    }
  }

  // score[i] = min over anchors of 1 - cos, nearest[i] = first minimizing
  // anchor in anchor order.
  std::vector<double> score(n, std::numeric_limits<double>::infinity());
  std::vector<std::string> nearest(n);
  std::vector<double> cos(n);
  auto absorb = [&](const Anchor& a) {
    kernels::omp::cosine_to(a.vector, *pool.semantic, rows, cos);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = 1.0 - cos[i];
      if (d < score[i]) {
        score[i] = d;
        nearest[i] = a.anchor_id;
      }
    }
  };
  for (const auto& a : anchors.anchors) absorb(a);

  EnrichmentResult res;
  auto& report = res.report;
  report.budget = budget;
  report.policy = anchors.policy;
  for (const auto& a : anchors.anchors) report.initial_anchors.push_back({a.anchor_id, a.origin});

  std::vector<char> added(n, 0);
  for (std::size_t step = 0; step < budget; ++step) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (added[i]) continue;
      if (pick == n || score[i] > score[pick]) pick = i;
    }
    added[pick] = 1;
    const auto& s = pool.scenes[pick];
    report.additions.push_back({step, s.scene_id, nearest[pick], score[pick]});
    res.added_positions.push_back(pick);
    if (anchors.policy == AnchorPolicy::dynamic) {
      const auto row = pool.semantic->row(rows[pick]);
      absorb({s.scene_id, std::vector<float>(row.begin(), row.end()), AnchorOrigin::added});
    }
  }

  Dataset additions = subset(pool, res.added_positions);
  for (auto& s : additions.scenes) s.source = "pool";
  res.enriched = concat(selected, additions);
  return res;
}

}  // namespace sse
