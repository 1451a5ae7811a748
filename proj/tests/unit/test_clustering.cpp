#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sse/clustering.hpp"
#include "sse/error.hpp"
#include "support.hpp"

using namespace sse;
using test::Rows;

namespace {

struct Planted {
  Rows rows;
  std::vector<std::size_t> labels;
};

// Blobs around orthogonal axes; shuffled so labels are interleaved.
Planted planted_blobs(std::size_t blobs, std::size_t per_blob, std::size_t dim, double sigma,
                      std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nd(0.0, sigma);
  Planted p;
  for (std::size_t b = 0; b < blobs; ++b) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      std::vector<float> v(dim);
      for (std::size_t j = 0; j < dim; ++j) v[j] = static_cast<float>((j == b ? 1.0 : 0.0) + nd(eng));
      p.rows.push_back(test::unit(v));
      p.labels.push_back(b);
    }
  }
  std::vector<std::size_t> order(p.rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), eng);
  Planted out;
  for (std::size_t i : order) {
    out.rows.push_back(p.rows[i]);
    out.labels.push_back(p.labels[i]);
  }
  return out;
}

std::vector<std::vector<double>> centroid_list(const ClusterModel& m) {
  std::vector<std::vector<double>> out;
  for (std::size_t c = 0; c < m.k; ++c) out.emplace_back(m.centroid(c).begin(), m.centroid(c).end());
  return out;
}

void check_means(const ClusterModel& model, const Rows& rows, double tol) {
  const auto members = model.members();
  for (std::size_t c = 0; c < model.k; ++c) {
    if (members[c].empty()) continue;
    for (std::size_t j = 0; j < model.dim; ++j) {
      long double s = 0;
      for (std::size_t i : members[c]) s += rows[i][j];
      CHECK(std::abs(static_cast<double>(s / members[c].size()) - model.centroid(c)[j]) <= tol);
    }
  }
}

}  // namespace

TEST_CASE("k equal to count puts every point in its own cluster") {
  std::mt19937_64 eng(1);
  const Rows rows = test::random_rows(eng, 12, 6);
  const auto model = kmeans_fit(test::to_matrix(rows), {12, 5, 100, 1e-4});
  CHECK(model.objective == 0.0);
  auto sorted = model.assignment;
  std::sort(sorted.begin(), sorted.end());
  for (std::uint32_t c = 0; c < 12; ++c) CHECK(sorted[c] == c);
}

TEST_CASE("k = 1 gives the mean of all rows") {
  std::mt19937_64 eng(2);
  const Rows rows = test::random_rows(eng, 40, 5);
  const auto model = kmeans_fit(test::to_matrix(rows), {1, 9, 100, 1e-4});
  for (auto a : model.assignment) CHECK(a == 0);
  check_means(model, rows, 1e-9);
}

TEST_CASE("three planted blobs are recovered exactly") {
  const auto p = planted_blobs(3, 50, 8, 0.01, 77);
  const auto model = kmeans_fit(test::to_matrix(p.rows), {3, 4, 100, 1e-4});
  CHECK(oracle::matching_accuracy(model.assignment, p.labels, 3) == 1.0);
}

TEST_CASE("objective never increases and converged centroids are member means") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CAPTURE(seed);
    const auto p = planted_blobs(6, 30, 10, 0.3, 100 + seed);
    const auto model = kmeans_fit(test::to_matrix(p.rows), {6, seed, 100, 0.0});
    for (std::size_t t = 1; t < model.objective_trace.size(); ++t) {
      CHECK(model.objective_trace[t] <= model.objective_trace[t - 1]);
    }
    CHECK(std::isfinite(model.objective));
    CHECK(model.objective >= 0.0);
    check_means(model, p.rows, 1e-5);
  }
}

TEST_CASE("restarts keep the lowest objective") {
  // The first restart replays the single-run stream, so more restarts can
  // only match or improve on it.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = planted_blobs(8, 25, 12, 0.3, 300 + seed);
    const auto m = test::to_matrix(p.rows);
    const auto one = kmeans_fit(m, {8, seed, 100, 1e-4, 0, 1});
    const auto four = kmeans_fit(m, {8, seed, 100, 1e-4, 0, 4});
    CHECK(four.objective <= one.objective);
  }
  std::mt19937_64 eng(3);
  const auto m = test::to_matrix(test::random_rows(eng, 10, 3));
  CHECK_THROWS_AS(kmeans_fit(m, {2, 0, 10, 1e-4, 0, 0}), Error);
}

TEST_CASE("classic and greedy seeding both converge to member means") {
  const auto p = planted_blobs(4, 30, 6, 0.2, 55);
  for (std::uint32_t trials : {1u, 3u}) {
    const auto model = kmeans_fit(test::to_matrix(p.rows), {4, 2, 200, 0.0, trials, 1});
    check_means(model, p.rows, 1e-5);
  }
}

TEST_CASE("same seed, same model") {
  const auto p = planted_blobs(5, 40, 12, 0.2, 9);
  const auto m = test::to_matrix(p.rows);
  const auto a = kmeans_fit(m, {5, 123, 50, 1e-4});
  const auto b = kmeans_fit(m, {5, 123, 50, 1e-4});
  CHECK(a.assignment == b.assignment);
  CHECK(a.centroids == b.centroids);
  CHECK(a.objective == b.objective);
}

TEST_CASE("more clusters than distinct points stays well formed") {
  // Five copies of one point and one distinct point, k = 3: seeding has to
  // reuse a duplicate, so one centroid coincides with another and loses every
  // tie. The fit must still finish with finite centroids and zero objective.
  std::mt19937_64 eng(4);
  const auto x = test::random_unit(eng, 4), y = test::random_unit(eng, 4);
  const Rows rows = {x, x, x, x, x, y};
  const auto model = kmeans_fit(test::to_matrix(rows), {3, 0, 20, 0.0});
  for (double c : model.centroids) CHECK(std::isfinite(c));
  CHECK(model.objective == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(model.assignment[0] != model.assignment[5]);
}

TEST_CASE("kmeans_fit preconditions") {
  std::mt19937_64 eng(5);
  const auto m = test::to_matrix(test::random_rows(eng, 4, 3));
  CHECK_THROWS_AS(kmeans_fit(m, {5, 0, 10, 1e-4}), Error);
  CHECK_THROWS_AS(kmeans_fit(m, {0, 0, 10, 1e-4}), Error);
  CHECK_THROWS_AS(kmeans_fit(m, {2, 0, 0, 1e-4}), Error);
  CHECK_THROWS_AS(kmeans_fit(test::to_matrix(test::random_rows(eng, 4, 3), false), {2, 0, 10, 1e-4}),
                  Error);
}

TEST_CASE("assign") {
  std::mt19937_64 eng(6);
  SUBCASE("rows equal to the centroids map to themselves") {
    const Rows rows = test::random_rows(eng, 7, 5);
    const auto model = kmeans_fit(test::to_matrix(rows), {7, 1, 10, 1e-4});
    std::vector<std::size_t> order(7);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rows cents;
    for (std::size_t c = 0; c < 7; ++c) {
      cents.emplace_back(model.centroid(c).begin(), model.centroid(c).end());
    }
    const auto a = assign(model, test::to_matrix(cents, false));
    for (std::uint32_t c = 0; c < 7; ++c) CHECK(a[c] == c);
  }
  SUBCASE("equidistant point goes to the lower index") {
    ClusterModel model;
    model.k = 4;
    model.dim = 2;
    model.centroids = {5, 5, 1, 0, -5, -5, 0, 1};
    const auto a = assign(model, EmbeddingMatrix(1, 2, {0.6f, 0.6f}));
    CHECK(a[0] == 1);
  }
  SUBCASE("matches the exhaustive scan") {
    const Rows rows = test::random_rows(eng, 60, 6);
    const auto model = kmeans_fit(test::to_matrix(rows), {5, 2, 100, 1e-4});
    const Rows probe = test::random_rows(eng, 20, 6);
    const auto a = assign(model, test::to_matrix(probe));
    const auto cents = centroid_list(model);
    for (std::size_t i = 0; i < probe.size(); ++i) CHECK(a[i] == oracle::nearest(probe[i], cents));
  }
  SUBCASE("dimension mismatch") {
    const auto model = kmeans_fit(test::to_matrix(test::random_rows(eng, 5, 3)), {2, 0, 10, 0});
    CHECK_THROWS_AS(assign(model, test::to_matrix(test::random_rows(eng, 2, 4))), Error);
  }
}

TEST_CASE("Euclidean and cosine orderings agree on unit rows") {
  std::mt19937_64 eng(7);
  for (int t = 0; t < 30; ++t) {
    const auto q = test::random_unit(eng, 8);
    const Rows rows = test::random_rows(eng, 10, 8);
    std::size_t by_cos = 0, by_euc = 0;
    double best_cos = -2, best_euc = 1e9;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double c = cosine(q, rows[i]);
      double e = 0;
      for (std::size_t j = 0; j < 8; ++j) e += (q[j] - rows[i][j]) * (q[j] - rows[i][j]);
      if (c > best_cos) best_cos = c, by_cos = i;
      if (e < best_euc) best_euc = e, by_euc = i;
    }
    CHECK(by_cos == by_euc);
  }
}

TEST_CASE("cluster model save/load") {
  std::mt19937_64 eng(8);
  test::TempDir tmp;
  const auto model = kmeans_fit(test::to_matrix(test::random_rows(eng, 30, 4)), {3, 1, 50, 1e-4});
  save_cluster_model(model, tmp / "c.ssev", tmp / "c.json");
  const auto back = load_cluster_model(tmp / "c.ssev", tmp / "c.json");
  CHECK(back.k == model.k);
  CHECK(back.assignment == model.assignment);
  CHECK(back.objective == model.objective);
  for (std::size_t i = 0; i < model.centroids.size(); ++i) {
    CHECK(back.centroids[i] == static_cast<float>(model.centroids[i]));
  }
}
