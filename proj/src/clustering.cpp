#include "sse/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sse/error.hpp"
#include "sse/kernels.hpp"
#include "sse/rng.hpp"

namespace sse {

namespace {

void copy_row(const EmbeddingMatrix& m, std::size_t row, std::span<double> dst) {
  auto src = m.row(row);
  std::copy(src.begin(), src.end(), dst.begin());
}

double total(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// Draws an index with probability proportional to weight. Zero weights are
// never drawn; the caller guarantees a positive sum.
std::size_t weighted_draw(std::span<const double> weight, double sum, rng::Engine& eng) {
  const double target = rng::uniform01(eng) * sum;
  double acc = 0.0;
  std::size_t pick = weight.size();
  for (std::size_t i = 0; i < weight.size(); ++i) {
    if (weight[i] <= 0.0) continue;
    acc += weight[i];
    pick = i;
    if (acc > target) break;
  }
  return pick;
}

// Greedy k-means++ seeding. The first center is uniform. Each further center
// is chosen among `trials` candidates drawn with probability proportional to
// squared distance to the nearest chosen center, keeping the candidate that
// lowers the total squared distance most (first candidate on ties). If every
// remaining point coincides with a center, the lowest-index unchosen point is
// used.
std::vector<double> plus_plus_init(const EmbeddingMatrix& m, std::uint32_t k,
                                   std::uint32_t trials, rng::Engine& eng) {
  const std::size_t n = m.count(), dim = m.dim();
  std::vector<double> centroids(std::size_t{k} * dim);
  std::vector<char> chosen(n, 0);
  std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());

  std::size_t first = rng::uniform_index(eng, n);
  chosen[first] = 1;
  copy_row(m, first, std::span(centroids).subspan(0, dim));
  kernels::omp::update_min_sq_distance(m, std::span<const double>(centroids).subspan(0, dim),
                                       min_sq);

  std::vector<double> candidate(dim), trial_sq(n), best_sq(n);
  for (std::uint32_t c = 1; c < k; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      if (chosen[i]) min_sq[i] = 0.0;
    }
    const double sum = total(min_sq);
    std::size_t pick = n;
    if (sum > 0.0) {
      double best_total = std::numeric_limits<double>::infinity();
      for (std::uint32_t t = 0; t < trials; ++t) {
        const std::size_t cand = weighted_draw(min_sq, sum, eng);
        copy_row(m, cand, candidate);
        trial_sq = min_sq;
        kernels::omp::update_min_sq_distance(m, candidate, trial_sq);
        const double potential = total(trial_sq);
        if (potential < best_total) {
          best_total = potential;
          pick = cand;
          best_sq.swap(trial_sq);
        }
      }
      min_sq.swap(best_sq);
    } else {
      for (std::uint32_t t = 0; t < trials; ++t) rng::uniform01(eng);  // data-independent draw count
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    chosen[pick] = 1;
    copy_row(m, pick, std::span(centroids).subspan(std::size_t{c} * dim, dim));
  }
  return centroids;
}

std::vector<std::vector<std::size_t>> group(std::span<const std::uint32_t> assignment,
                                            std::size_t k) {
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < assignment.size(); ++i) members[assignment[i]].push_back(i);
  return members;
}

// Moves the farthest points (from their own centroid) into empty clusters.
// Donor clusters must keep at least one member.
void reseed_empty(const EmbeddingMatrix& m, std::vector<double>& centroids,
                  std::vector<std::uint32_t>& assignment,
                  std::vector<std::vector<std::size_t>>& members) {
  const std::size_t dim = m.dim();
  std::vector<double> dist;
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (!members[c].empty()) continue;
    if (dist.empty()) {
      dist.resize(m.count());
      for (std::size_t i = 0; i < m.count(); ++i) {
        dist[i] = kernels::squared_distance(
            m.row(i), std::span<const double>(centroids).subspan(assignment[i] * dim, dim));
      }
    }
    std::size_t best = m.count();
    double best_d = -1.0;
    for (std::size_t i = 0; i < m.count(); ++i) {
      if (members[assignment[i]].size() < 2) continue;
      if (dist[i] > best_d) {
        best_d = dist[i];
        best = i;
      }
    }
    if (best == m.count()) break;  // k <= n makes this unreachable
    auto& donor = members[assignment[best]];
    donor.erase(std::find(donor.begin(), donor.end(), best));
    assignment[best] = static_cast<std::uint32_t>(c);
    members[c].push_back(best);
    dist[best] = 0.0;
    copy_row(m, best, std::span(centroids).subspan(c * dim, dim));
  }
}

ClusterModel fit_once(const EmbeddingMatrix& m, const KMeansOptions& opts, std::uint32_t trials,
                      rng::Engine& eng) {
  const std::size_t n = m.count(), dim = m.dim();
  ClusterModel model;
  model.k = opts.k;
  model.dim = dim;
  model.seed = opts.seed;
  model.centroids = plus_plus_init(m, opts.k, trials, eng);
  model.assignment.assign(n, 0);
  std::vector<double> sq(n);

  kernels::omp::nearest_centroid(m, model.centroids, opts.k, model.assignment, sq);
  double objective = total(sq);
  model.objective_trace.push_back(objective);

  std::vector<std::uint32_t> next(n);
  bool settled = false;
  for (std::uint32_t it = 1; it <= opts.max_iters; ++it) {
    auto members = group(model.assignment, opts.k);
    reseed_empty(m, model.centroids, model.assignment, members);
    kernels::omp::cluster_means(m, members, model.centroids);
    kernels::omp::nearest_centroid(m, model.centroids, opts.k, next, sq);
    const double prev = objective;
    objective = total(sq);
    model.objective_trace.push_back(objective);
    model.iterations_run = it;
    const bool changed = next != model.assignment;
    model.assignment.swap(next);
    if (!changed) {
      settled = true;
      break;
    }
    if (prev <= 0.0 || (prev - objective) < opts.tol * prev) break;
  }

  if (!settled) {
    // Stopped on tol or max_iters with a fresh assignment: finish with one
    // mean update so every non-empty centroid is its members' mean.
    kernels::omp::cluster_means(m, group(model.assignment, opts.k), model.centroids);
    for (std::size_t i = 0; i < n; ++i) {
      sq[i] = kernels::squared_distance(m.row(i), model.centroid(model.assignment[i]));
    }
    objective = total(sq);
    model.objective_trace.push_back(objective);
  }
  model.objective = objective;
  return model;
}

}  // namespace

std::vector<std::vector<std::size_t>> ClusterModel::members() const {
  return group(assignment, k);
}

ClusterModel kmeans_fit(const EmbeddingMatrix& m, const KMeansOptions& opts) {
  const std::size_t n = m.count();
  if (!m.normalized()) {
    throw Error(ErrorCode::precondition, "k-means requires normalized embeddings");
  }
  if (opts.k < 1 || opts.k > n) {
    throw Error(ErrorCode::precondition, "k = " + std::to_string(opts.k) +
                                             " must be in [1, " + std::to_string(n) + "]");
  }
  if (opts.max_iters < 1) throw Error(ErrorCode::precondition, "max_iters must be >= 1");
  if (!(opts.tol >= 0.0)) throw Error(ErrorCode::precondition, "tol must be >= 0");
  if (opts.restarts < 1) throw Error(ErrorCode::precondition, "restarts must be >= 1");

  const std::uint32_t trials =
      opts.seed_trials > 0
          ? opts.seed_trials
          : 2 + static_cast<std::uint32_t>(std::floor(std::log(static_cast<double>(opts.k))));
  // One PRNG stream across restarts; the first run with the lowest objective wins.
  rng::Engine eng(opts.seed);
  ClusterModel best = fit_once(m, opts, trials, eng);
  for (std::uint32_t r = 1; r < opts.restarts; ++r) {
    ClusterModel next = fit_once(m, opts, trials, eng);
    if (next.objective < best.objective) best = std::move(next);
  }
  return best;
}

std::vector<std::uint32_t> assign(const ClusterModel& model, const EmbeddingMatrix& m) {
  if (m.count() > 0 && m.dim() != model.dim) {
    throw Error(ErrorCode::dimension_mismatch,
                "rows have dim " + std::to_string(m.dim()) + ", model has dim " +
                    std::to_string(model.dim));
  }
  std::vector<std::uint32_t> out(m.count());
  std::vector<double> sq(m.count());
  kernels::omp::nearest_centroid(m, model.centroids, model.k, out, sq);
  return out;
}

void save_cluster_model(const ClusterModel& model, const std::filesystem::path& centroids_path,
                        const std::filesystem::path& meta_path, const Json& extra) {
  std::vector<float> data(model.centroids.begin(), model.centroids.end());
  write_embeddings(EmbeddingMatrix(model.k, model.dim, std::move(data), false), centroids_path);
  Json meta;
  meta["k"] = model.k;
  meta["dim"] = model.dim;
  meta["seed"] = model.seed;
  meta["objective"] = model.objective;
  meta["iterations"] = model.iterations_run;
  meta["objective_trace"] = model.objective_trace;
  meta["assignment"] = model.assignment;
  for (const auto& [key, value] : extra.items()) meta[key] = value;
  write_json_file(meta, meta_path);
}

ClusterModel load_cluster_model(const std::filesystem::path& centroids_path,
                                const std::filesystem::path& meta_path) {
  const EmbeddingMatrix c = read_embeddings(centroids_path, RowCheck::finite_only);
  const Json meta = read_json_file(meta_path);
  ClusterModel model;
  try {
    model.k = meta.at("k");
    model.dim = meta.at("dim");
    model.seed = meta.at("seed");
    model.objective = meta.at("objective");
    model.iterations_run = meta.at("iterations");
    model.objective_trace = meta.value("objective_trace", std::vector<double>{});
    model.assignment = meta.value("assignment", std::vector<std::uint32_t>{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format, meta_path.string() + ": " + e.what());
  }
  if (c.count() != model.k || c.dim() != model.dim) {
    throw Error(ErrorCode::format, "centroid file shape does not match metadata");
  }
  model.centroids.assign(c.data().begin(), c.data().end());
  return model;
}

}  // namespace sse
