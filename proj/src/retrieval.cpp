#include "sse/retrieval.hpp"

#include <algorithm>

#include "sse/error.hpp"
#include "sse/kernels.hpp"

namespace sse {

std::vector<RetrievalHit> retrieve(const Dataset& ds, std::span<const float> query,
                                   std::size_t top_n) {
  if (!ds.semantic) throw Error(ErrorCode::precondition, "dataset has no semantic matrix");
  if (top_n < 1) throw Error(ErrorCode::invalid_argument, "top_n must be >= 1");
  if (query.size() != ds.semantic->dim()) {
    throw Error(ErrorCode::dimension_mismatch,
                "query has dim " + std::to_string(query.size()) + ", dataset has dim " +
                    std::to_string(ds.semantic->dim()));
  }
  if (l2_norm(query) == 0.0) throw Error(ErrorCode::precondition, "query is a zero vector");

  std::vector<std::size_t> positions, rows;
  for (std::size_t p = 0; p < ds.size(); ++p) {
    if (ds.scenes[p].semantic_row) {
      positions.push_back(p);
      rows.push_back(*ds.scenes[p].semantic_row);
    }
  }
  std::vector<double> sim(rows.size());
  kernels::omp::cosine_to(query, *ds.semantic, rows, sim);

  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t n = std::min(top_n, order.size());
  std::partial_sort(order.begin(), order.begin() + n, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (sim[a] != sim[b]) return sim[a] > sim[b];
                      return a < b;
                    });
  std::vector<RetrievalHit> hits;
  hits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t p = positions[order[i]];
    hits.push_back({p, ds.scenes[p].scene_id, sim[order[i]]});
  }
  return hits;
}

Json hits_to_json(const Dataset& ds, const std::vector<RetrievalHit>& hits) {
  Json out = Json::array();
  for (const auto& h : hits) {
    out.push_back({{"scene_id", h.scene_id},
                   {"similarity", h.similarity},
                   {"caption", ds.scenes[h.position].caption}});
  }
  return out;
}

}  // namespace sse
