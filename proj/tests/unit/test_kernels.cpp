#include <doctest.h>

#include <random>

#include "sse/kernels.hpp"
#include "support.hpp"

using namespace sse;

// The omp kernels must reproduce the serial reference bit for bit at every
// thread count.
TEST_CASE("omp kernels are bit-identical to the serial reference") {
  std::mt19937_64 eng(1234);
  const auto rows = test::random_rows(eng, 777, 19);
  const auto m = test::to_matrix(rows);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < 300; ++i) idx.push_back((i * 37) % m.count());
  const auto q = test::random_unit(eng, 19);

  const std::size_t k = 13;
  std::vector<double> centroids(k * 19);
  std::normal_distribution<double> nd;
  for (double& c : centroids) c = nd(eng) * 0.3;
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < m.count(); ++i) members[(i * 7) % (k - 1)].push_back(i);

  for (int threads : {1, 2, 3, 8}) {
    CAPTURE(threads);
    kernels::set_num_threads(threads);

    std::vector<double> a(idx.size()), b(idx.size());
    kernels::serial::cosine_to(q, m, idx, a);
    kernels::omp::cosine_to(q, m, idx, b);
    CHECK(a == b);

    std::vector<double> all_a(m.count()), all_b(m.count());
    kernels::serial::cosine_all(q, m, all_a);
    kernels::omp::cosine_all(q, m, all_b);
    CHECK(all_a == all_b);

    CHECK(kernels::serial::pairwise_distances(idx, m) == kernels::omp::pairwise_distances(idx, m));

    std::vector<std::uint32_t> as(m.count()), ao(m.count());
    std::vector<double> ds(m.count()), dd(m.count());
    kernels::serial::nearest_centroid(m, centroids, k, as, ds);
    kernels::omp::nearest_centroid(m, centroids, k, ao, dd);
    CHECK(as == ao);
    CHECK(ds == dd);

    auto cs = centroids, co = centroids;
    kernels::serial::cluster_means(m, members, cs);
    kernels::omp::cluster_means(m, members, co);
    CHECK(cs == co);
    // the last cluster has no members and keeps its centroid
    CHECK(std::equal(cs.end() - 19, cs.end(), centroids.end() - 19));

    std::vector<double> ms(m.count(), 1e9), mo(m.count(), 1e9);
    kernels::serial::update_min_sq_distance(m, std::span(centroids).subspan(0, 19), ms);
    kernels::omp::update_min_sq_distance(m, std::span(centroids).subspan(0, 19), mo);
    CHECK(ms == mo);
  }
  kernels::set_num_threads(1);
}

TEST_CASE("nearest_centroid breaks ties toward the lower index") {
  // Point at the origin is equidistant to all three centroids.
  const EmbeddingMatrix m(1, 2, {0.0f, 0.0f}, false);
  const std::vector<double> c = {1, 0, 0, 1, -1, 0};
  std::vector<std::uint32_t> a(1);
  std::vector<double> d(1);
  kernels::serial::nearest_centroid(m, c, 3, a, d);
  CHECK(a[0] == 0);
  kernels::omp::nearest_centroid(m, c, 3, a, d);
  CHECK(a[0] == 0);
}
