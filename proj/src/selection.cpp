#include "sse/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sse/error.hpp"
#include "sse/rng.hpp"

namespace sse {

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 2.0)) {
    throw Error(ErrorCode::invalid_argument, "epsilon must be in [0, 2]");
  }
}

void check_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "fraction must be in (0, 1]");
  }
}

ClusterPrune prune_one(const Dataset& ds, const std::vector<std::size_t>& cluster,
                       double epsilon) {
  std::vector<std::size_t> with_visual;
  std::vector<std::size_t> without;
  for (std::size_t p : cluster) {
    (ds.scenes[p].visual_row ? with_visual : without).push_back(p);
  }
  ClusterPrune out = greedy_prune_cluster(ds, with_visual, epsilon);
  if (!without.empty()) {
    out.kept.insert(out.kept.end(), without.begin(), without.end());
    std::sort(out.kept.begin(), out.kept.end());
  }
  return out;
}

}  // namespace

ClusterPrune greedy_prune_cluster(const Dataset& ds, std::span<const std::size_t> members,
                                  double epsilon) {
  check_epsilon(epsilon);
  for (std::size_t p : members) {
    if (!ds.scenes.at(p).visual_row) {
      throw Error(ErrorCode::precondition,
                  "scene '" + ds.scenes[p].scene_id + "' has no visual row");
    }
  }
  ClusterPrune out;
  std::vector<char> removed(members.size(), 0);
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (removed[i]) continue;
    const auto& keeper = ds.scenes[members[i]];
    out.kept.push_back(members[i]);
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      if (removed[j]) continue;
      const double sim = cosine(ds.visual_of(keeper), ds.visual_of(ds.scenes[members[j]]));
      if (1.0 - sim < epsilon) {
        removed[j] = 1;
        out.pruned.push_back({members[j], members[i], sim});
      }
    }
  }
  std::sort(out.pruned.begin(), out.pruned.end(),
            [](const PrunedMember& a, const PrunedMember& b) { return a.position < b.position; });
  return out;
}

namespace serial {
std::vector<ClusterPrune> prune_clusters(const Dataset& ds,
                                         const std::vector<std::vector<std::size_t>>& clusters,
                                         double epsilon) {
  std::vector<ClusterPrune> out(clusters.size());
  for (std::size_t c = 0; c < clusters.size(); ++c) out[c] = prune_one(ds, clusters[c], epsilon);
  return out;
}
}  // namespace serial

namespace omp {
std::vector<ClusterPrune> prune_clusters(const Dataset& ds,
                                         const std::vector<std::vector<std::size_t>>& clusters,
                                         double epsilon) {
  check_epsilon(epsilon);
  if (!ds.visual) throw Error(ErrorCode::precondition, "dataset has no visual matrix");
  std::vector<ClusterPrune> out(clusters.size());
  const auto k = static_cast<std::ptrdiff_t>(clusters.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < k; ++c) out[c] = prune_one(ds, clusters[c], epsilon);
  return out;
}
}  // namespace omp

EmbeddingMatrix clustering_rows(const Dataset& ds, ClusterSpace space) {
  const bool sem = space == ClusterSpace::semantic;
  const auto& m = sem ? ds.semantic : ds.visual;
  const char* what = sem ? "semantic" : "visual";
  if (!m) throw Error(ErrorCode::precondition, std::string("dataset has no ") + what + " matrix");
  std::vector<std::size_t> rows;
  rows.reserve(ds.size());
  for (const auto& s : ds.scenes) {
    const auto& r = sem ? s.semantic_row : s.visual_row;
    if (!r) {
      throw Error(ErrorCode::precondition,
                  "scene '" + s.scene_id + "' has no " + what + " row to cluster on");
    }
    rows.push_back(*r);
  }
  return m->gather(rows);
}

SelectionResult select_with_model(const Dataset& ds, const ClusterModel& model,
                                  const SelectionParams& params) {
  check_epsilon(params.epsilon);
  if (!ds.visual) throw Error(ErrorCode::precondition, "dataset has no visual matrix");
  if (model.assignment.size() != ds.size()) {
    throw Error(ErrorCode::precondition, "cluster assignment does not match dataset size");
  }
  const auto clusters = model.members();
  const auto pruned = omp::prune_clusters(ds, clusters, params.epsilon);

  SelectionResult res;
  res.model = model;
  auto& report = res.report;
  report.params = params;
  report.total = ds.size();
  report.entries.resize(ds.size());
  for (std::size_t p = 0; p < ds.size(); ++p) {
    auto& e = report.entries[p];
    e.scene_id = ds.scenes[p].scene_id;
    e.cluster_id = model.assignment[p];
    e.missing_visual = !ds.scenes[p].visual_row;
  }
  for (const auto& cp : pruned) {
    for (const auto& pm : cp.pruned) {
      auto& e = report.entries[pm.position];
      e.verdict = Verdict::pruned;
      e.keeper_scene_id = ds.scenes[pm.keeper_position].scene_id;
      e.visual_similarity = pm.similarity;
      ++report.pruned;
    }
  }
  for (std::size_t p = 0; p < ds.size(); ++p) {
    if (report.entries[p].verdict == Verdict::kept) res.kept_positions.push_back(p);
  }
  report.kept = res.kept_positions.size();
  res.selected = subset(ds, res.kept_positions);
  return res;
}

SelectionResult select(const Dataset& ds, const SelectOptions& opts) {
  check_epsilon(opts.params.epsilon);
  if (!ds.semantic || !ds.visual) {
    throw Error(ErrorCode::precondition, "selection needs both semantic and visual matrices");
  }
  const EmbeddingMatrix rows = clustering_rows(ds, opts.space);
  const ClusterModel model =
      kmeans_fit(rows, {opts.params.k, opts.params.seed, opts.max_iters, opts.tol, 0,
                        opts.restarts});
  return select_with_model(ds, model, opts.params);
}

std::size_t keep_count(double fraction, std::size_t n) {
  const double exact = fraction * static_cast<double>(n);
  auto m = static_cast<std::size_t>(std::ceil(exact));
  if (m > 0 && static_cast<double>(m - 1) >= exact - 1e-9) --m;
  return std::min(m, n);
}

std::vector<std::size_t> random_select(const Dataset& ds, double fraction, std::uint64_t seed) {
  check_fraction(fraction);
  auto perm = rng::permutation(ds.size(), seed);
  perm.resize(keep_count(fraction, ds.size()));
  std::sort(perm.begin(), perm.end());
  return perm;
}

std::vector<double> rfs_scores(const Dataset& ds, double t) {
  if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorCode::invalid_argument, "t must be in (0, 1]");
  std::map<std::string, std::size_t> scenes_with;
  for (const auto& s : ds.scenes) {
    if (!s.labels) {
      throw Error(ErrorCode::precondition,
                  "scene '" + s.scene_id + "' is unlabeled; RFS needs labels on every scene");
    }
    for (const auto& [cls, count] : *s.labels) {
      if (count > 0) ++scenes_with[cls];
    }
  }
  std::map<std::string, double> repeat;
  const double n = static_cast<double>(ds.size());
  for (const auto& [cls, with] : scenes_with) {
    repeat[cls] = std::max(1.0, std::sqrt(t / (static_cast<double>(with) / n)));
  }
  std::vector<double> scores(ds.size(), 1.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (const auto& [cls, count] : *ds.scenes[i].labels) {
      if (count > 0) scores[i] = std::max(scores[i], repeat[cls]);
    }
  }
  return scores;
}

std::vector<std::size_t> rfs_ranking(const Dataset& ds, double t, std::uint64_t seed) {
  const auto scores = rfs_scores(ds, t);
  const auto perm = rng::permutation(ds.size(), seed);
  std::vector<std::size_t> shuffle_rank(ds.size());
  for (std::size_t r = 0; r < perm.size(); ++r) shuffle_rank[perm[r]] = r;
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    if (shuffle_rank[a] != shuffle_rank[b]) return shuffle_rank[a] < shuffle_rank[b];
    return a < b;
  });
  return order;
}

std::vector<std::size_t> rfs_select(const Dataset& ds, double fraction, double t,
                                    std::uint64_t seed) {
  check_fraction(fraction);
  auto order = rfs_ranking(ds, t, seed);
  order.resize(keep_count(fraction, ds.size()));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace sse
