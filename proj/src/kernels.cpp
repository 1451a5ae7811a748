#include "sse/kernels.hpp"

#include <omp.h>

#include <limits>

namespace sse::kernels {

double squared_distance(std::span<const float> x, std::span<const double> c) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = static_cast<double>(x[j]) - c[j];
    s += d * d;
  }
  return s;
}

namespace {

// Shared per-element bodies; the two namespaces differ only in how the outer
// loop is scheduled.

inline void nearest_one(const EmbeddingMatrix& points, std::span<const double> centroids,
                        std::size_t k, std::size_t i, std::uint32_t& best_c,
                        double& best_d) {
  const std::size_t dim = points.dim();
  auto x = points.row(i);
  best_d = std::numeric_limits<double>::infinity();
  best_c = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double d = squared_distance(x, centroids.subspan(c * dim, dim));
    if (d < best_d) {
      best_d = d;
      best_c = static_cast<std::uint32_t>(c);
    }
  }
}

inline void mean_one(const EmbeddingMatrix& points, const std::vector<std::size_t>& rows,
                     std::span<double> centroid) {
  if (rows.empty()) return;
  std::fill(centroid.begin(), centroid.end(), 0.0);
  for (std::size_t r : rows) {
    auto x = points.row(r);
    for (std::size_t j = 0; j < x.size(); ++j) centroid[j] += x[j];
  }
  const double n = static_cast<double>(rows.size());
  for (double& v : centroid) v /= n;
}

inline void pairwise_row(std::span<const std::size_t> rows, const EmbeddingMatrix& m,
                         std::size_t i, std::vector<double>& d) {
  const std::size_t n = rows.size();
  d[i * n + i] = 0.0;
  for (std::size_t j = i + 1; j < n; ++j) {
    const double v = cosine_distance(m.row(rows[i]), m.row(rows[j]));
    d[i * n + j] = v;
    d[j * n + i] = v;
  }
}

}  // namespace

namespace serial {

void cosine_to(std::span<const float> query, const EmbeddingMatrix& m,
               std::span<const std::size_t> rows, std::span<double> out) {
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = cosine(query, m.row(rows[i]));
}

void cosine_all(std::span<const float> query, const EmbeddingMatrix& m,
                std::span<double> out) {
  for (std::size_t i = 0; i < m.count(); ++i) out[i] = cosine(query, m.row(i));
}

std::vector<double> pairwise_distances(std::span<const std::size_t> rows,
                                       const EmbeddingMatrix& m) {
  std::vector<double> d(rows.size() * rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) pairwise_row(rows, m, i, d);
  return d;
}

void nearest_centroid(const EmbeddingMatrix& points, std::span<const double> centroids,
                      std::size_t k, std::span<std::uint32_t> assignment,
                      std::span<double> sq_dist) {
  for (std::size_t i = 0; i < points.count(); ++i) {
    nearest_one(points, centroids, k, i, assignment[i], sq_dist[i]);
  }
}

void cluster_means(const EmbeddingMatrix& points,
                   const std::vector<std::vector<std::size_t>>& members,
                   std::span<double> centroids) {
  const std::size_t dim = points.dim();
  for (std::size_t c = 0; c < members.size(); ++c) {
    mean_one(points, members[c], centroids.subspan(c * dim, dim));
  }
}

void update_min_sq_distance(const EmbeddingMatrix& points, std::span<const double> center,
                            std::span<double> min_sq) {
  for (std::size_t i = 0; i < points.count(); ++i) {
    const double d = squared_distance(points.row(i), center);
    if (d < min_sq[i]) min_sq[i] = d;
  }
}

}  // namespace serial

namespace omp {

void cosine_to(std::span<const float> query, const EmbeddingMatrix& m,
               std::span<const std::size_t> rows, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = cosine(query, m.row(rows[i]));
}

void cosine_all(std::span<const float> query, const EmbeddingMatrix& m,
                std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(m.count());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = cosine(query, m.row(i));
}

std::vector<double> pairwise_distances(std::span<const std::size_t> rows,
                                       const EmbeddingMatrix& m) {
  std::vector<double> d(rows.size() * rows.size());
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) pairwise_row(rows, m, i, d);
  return d;
}

void nearest_centroid(const EmbeddingMatrix& points, std::span<const double> centroids,
                      std::size_t k, std::span<std::uint32_t> assignment,
                      std::span<double> sq_dist) {
  const auto n = static_cast<std::ptrdiff_t>(points.count());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    nearest_one(points, centroids, k, i, assignment[i], sq_dist[i]);
  }
}

void cluster_means(const EmbeddingMatrix& points,
                   const std::vector<std::vector<std::size_t>>& members,
                   std::span<double> centroids) {
  const std::size_t dim = points.dim();
  const auto k = static_cast<std::ptrdiff_t>(members.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < k; ++c) {
    mean_one(points, members[c], centroids.subspan(c * dim, dim));
  }
}

void update_min_sq_distance(const EmbeddingMatrix& points, std::span<const double> center,
                            std::span<double> min_sq) {
  const auto n = static_cast<std::ptrdiff_t>(points.count());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double d = squared_distance(points.row(i), center);
    if (d < min_sq[i]) min_sq[i] = d;
  }
}

}  // namespace omp

void set_num_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace sse::kernels
