#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sse/vecstore.hpp"

// Data-parallel inner loops. Each kernel exists twice with the same
// signature: `serial` is the plain reference loop, `omp` distributes the
// outer loop with OpenMP. Every output element is produced by the same scalar
// routine in both, so results are bit-identical for any thread count.
namespace sse::kernels {

// Squared Euclidean distance between a float row and a double centroid.
double squared_distance(std::span<const float> x, std::span<const double> c);

namespace serial {

// out[i] = cosine(query, m.row(rows[i]))
void cosine_to(std::span<const float> query, const EmbeddingMatrix& m,
               std::span<const std::size_t> rows, std::span<double> out);

// out[i] = cosine(query, m.row(i)) for every row.
void cosine_all(std::span<const float> query, const EmbeddingMatrix& m,
                std::span<double> out);

// Row-major n*n cosine distances over the listed rows.
std::vector<double> pairwise_distances(std::span<const std::size_t> rows,
                                       const EmbeddingMatrix& m);

// Nearest centroid by squared distance; ties go to the lowest index.
void nearest_centroid(const EmbeddingMatrix& points,
                      std::span<const double> centroids, std::size_t k,
                      std::span<std::uint32_t> assignment,
                      std::span<double> sq_dist);

// centroids[c] = mean of members[c], summed in ascending row order. Clusters
// with no members keep their current centroid.
void cluster_means(const EmbeddingMatrix& points,
                   const std::vector<std::vector<std::size_t>>& members,
                   std::span<double> centroids);

// min_sq[i] = min(min_sq[i], |row_i - center|^2)
void update_min_sq_distance(const EmbeddingMatrix& points,
                            std::span<const double> center,
                            std::span<double> min_sq);

}  // namespace serial

namespace omp {

void cosine_to(std::span<const float> query, const EmbeddingMatrix& m,
               std::span<const std::size_t> rows, std::span<double> out);
void cosine_all(std::span<const float> query, const EmbeddingMatrix& m,
                std::span<double> out);
std::vector<double> pairwise_distances(std::span<const std::size_t> rows,
                                       const EmbeddingMatrix& m);
void nearest_centroid(const EmbeddingMatrix& points,
                      std::span<const double> centroids, std::size_t k,
                      std::span<std::uint32_t> assignment,
                      std::span<double> sq_dist);
void cluster_means(const EmbeddingMatrix& points,
                   const std::vector<std::vector<std::size_t>>& members,
                   std::span<double> centroids);
void update_min_sq_distance(const EmbeddingMatrix& points,
                            std::span<const double> center,
                            std::span<double> min_sq);

}  // namespace omp

// Sets the OpenMP team size used by the omp kernels; n <= 0 keeps the
// runtime default.
void set_num_threads(int n);
int max_threads();

}  // namespace sse::kernels
