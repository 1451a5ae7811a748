#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sse/datamodel.hpp"
#include "sse/vecstore.hpp"

namespace sse {

struct KMeansOptions {
  std::uint32_t k = 300;
  std::uint64_t seed = 0;
  std::uint32_t max_iters = 100;
  double tol = 1e-4;  // stop when relative objective improvement drops below
  // Candidates drawn per seeding step; 0 picks 2 + floor(ln k), 1 is the
  // classic single-draw k-means++.
  std::uint32_t seed_trials = 0;
  // Independent seed-and-iterate runs; the lowest objective is kept.
  std::uint32_t restarts = 4;
};

struct ClusterModel {
  std::uint32_t k = 0;
  std::size_t dim = 0;
  std::vector<double> centroids;  // k * dim, row-major
  std::vector<std::uint32_t> assignment;
  double objective = 0.0;  // sum of squared distances to assigned centroids
  std::uint32_t iterations_run = 0;
  std::uint64_t seed = 0;
  // Objective after initial assignment and after every Lloyd iteration.
  std::vector<double> objective_trace;

  std::span<const double> centroid(std::size_t c) const {
    return {centroids.data() + c * dim, dim};
  }
  // members[c] = rows assigned to c, ascending.
  std::vector<std::vector<std::size_t>> members() const;
};

// Seeded greedy k-means++ initialization followed by Lloyd iterations over
// unit-normalized rows, repeated `restarts` times. Empty clusters are reseeded with the point farthest
// from its current centroid.
ClusterModel kmeans_fit(const EmbeddingMatrix& m, const KMeansOptions& opts);

// Nearest centroid per row by squared Euclidean distance, ties to the lowest
// cluster index.
std::vector<std::uint32_t> assign(const ClusterModel& model, const EmbeddingMatrix& m);

// Centroids as an SSEV file (flags 0) plus JSON metadata.
void save_cluster_model(const ClusterModel& model, const std::filesystem::path& centroids_path,
                        const std::filesystem::path& meta_path, const Json& extra = Json::object());
ClusterModel load_cluster_model(const std::filesystem::path& centroids_path,
                                const std::filesystem::path& meta_path);

}  // namespace sse
