#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "sse/error.hpp"
#include "sse/metrics.hpp"
#include "sse/synthgen.hpp"
#include "support.hpp"

using namespace sse;
using test::Rows;

namespace {

SynthOutput blobs(std::uint64_t seed, LabelProfile labels = LabelProfile::none) {
  SynthSpec spec;
  spec.per_blob = 40;
  spec.dim = 16;
  spec.seed = seed;
  spec.labels = labels;
  spec.visual_sigma = 0.15;
  return generate(spec);
}

std::size_t replay_kept(const Dataset& ds, const ClusterModel& model, double eps) {
  std::size_t kept = 0;
  for (const auto& members : model.members()) {
    Rows v;
    for (std::size_t p : members) {
      const auto r = ds.visual_of(ds.scenes[p]);
      v.emplace_back(r.begin(), r.end());
    }
    for (const auto& d : oracle::greedy_replay(v, eps)) kept += d.kept ? 1 : 0;
  }
  return kept;
}

}  // namespace

TEST_CASE("retention curve") {
  const auto synth = blobs(1);
  const Dataset& ds = synth.dataset;
  SelectOptions base;
  base.params = {8, 0.0, 2};

  SUBCASE("epsilon 0 keeps everything") {
    const std::vector<double> eps = {0.0};
    const auto curve = retention_curve(ds, base, eps);
    REQUIRE(curve.size() == 1);
    CHECK(curve[0].fraction_remaining == 1.0);
    CHECK(curve[0].kept == ds.scenes.size());
  }
  SUBCASE("non-increasing and equal to the replay at every epsilon") {
    std::vector<double> eps;
    for (int i = 1; i <= 10; ++i) eps.push_back(0.05 * i);
    const auto model = kmeans_fit(*ds.semantic, {8, 2, base.max_iters, base.tol});
    const auto curve = retention_curve(ds, model, eps);
    REQUIRE(curve.size() == eps.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
      CAPTURE(eps[i]);
      CHECK(curve[i].epsilon == eps[i]);
      CHECK(curve[i].kept == replay_kept(ds, model, eps[i]));
      CHECK(curve[i].fraction_remaining ==
            doctest::Approx(static_cast<double>(curve[i].kept) / ds.scenes.size()));
      if (i > 0) CHECK(curve[i].fraction_remaining <= curve[i - 1].fraction_remaining);
    }
    CHECK(curve == retention_curve(ds, base, eps));
  }
  SUBCASE("out-of-range epsilon") {
    const std::vector<double> eps = {0.1, 2.5};
    CHECK_THROWS_AS(retention_curve(ds, base, eps), Error);
  }
}

TEST_CASE("unique sessions per cluster") {
  std::mt19937_64 eng(3);
  const Rows rows = test::random_rows(eng, 30, 4);
  Dataset ds = test::make_dataset(rows, rows);
  const auto model = kmeans_fit(*ds.semantic, {4, 1, 100, 1e-4});
  const auto members = model.members();

  SUBCASE("one session everywhere") {
    for (auto& s : ds.scenes) s.session_id = "only";
    const auto counts = unique_sessions_per_cluster(model, ds);
    for (std::size_t c = 0; c < counts.size(); ++c) CHECK(counts[c] == (members[c].empty() ? 0u : 1u));
  }
  SUBCASE("distinct sessions count members") {
    for (std::size_t i = 0; i < ds.scenes.size(); ++i) ds.scenes[i].session_id = "s" + std::to_string(i);
    const auto counts = unique_sessions_per_cluster(model, ds);
    std::size_t total = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      CHECK(counts[c] == members[c].size());
      total += counts[c];
    }
    CHECK(total == ds.scenes.size());
  }
  SUBCASE("matches a set-based count") {
    const auto counts = unique_sessions_per_cluster(model, ds);
    double sum = 0;
    std::size_t non_empty = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      std::set<std::string> seen;
      for (std::size_t p : members[c]) seen.insert(ds.scenes[p].session_id);
      CHECK(counts[c] == seen.size());
      if (!members[c].empty()) sum += seen.size(), ++non_empty;
    }
    CHECK(mean_unique_sessions(counts, model) == doctest::Approx(sum / non_empty));
  }
}

TEST_CASE("semantic clusters span more sessions than visual clusters") {
  const auto synth = blobs(5);
  const Dataset& ds = synth.dataset;
  const auto sem = kmeans_fit(*ds.semantic, {8, 1, 100, 1e-4});
  const auto vis = kmeans_fit(*ds.visual, {8, 1, 100, 1e-4});
  const double s = mean_unique_sessions(unique_sessions_per_cluster(sem, ds), sem);
  const double v = mean_unique_sessions(unique_sessions_per_cluster(vis, ds), vis);
  CHECK(s > v);
}

TEST_CASE("object counts") {
  Dataset empty;
  CHECK(object_counts(empty).empty());

  std::mt19937_64 eng(4);
  Dataset two = test::make_dataset(test::random_rows(eng, 2, 3), test::random_rows(eng, 2, 3));
  two.scenes[0].labels = std::map<std::string, std::uint64_t>{{"car", 2}};
  two.scenes[1].labels = std::map<std::string, std::uint64_t>{{"car", 1}, {"person", 4}};
  CHECK(object_counts(two) == std::map<std::string, std::uint64_t>{{"car", 3}, {"person", 4}});

  const auto synth = blobs(6, LabelProfile::longtail);
  std::map<std::string, std::uint64_t> fold;
  for (const auto& s : synth.dataset.scenes) {
    for (const auto& [cls, n] : *s.labels) fold[cls] += n;
  }
  CHECK(object_counts(synth.dataset) == fold);

  two.scenes[1].labels.reset();
  CHECK_THROWS_AS(object_counts(two), Error);
}

TEST_CASE("k sweep") {
  const auto synth = blobs(7);
  const Dataset& ds = synth.dataset;
  const auto n = static_cast<std::uint32_t>(ds.scenes.size());

  SUBCASE("one cluster per scene keeps everything") {
    const std::vector<std::uint32_t> ks = {n};
    CHECK(k_sweep(ds, ks, 0.3, 1)[0].fraction_remaining == 1.0);
  }
  SUBCASE("a single cluster keeps no more than singleton clusters") {
    const std::vector<std::uint32_t> ks = {1, n};
    const auto pts = k_sweep(ds, ks, 0.3, 1);
    CHECK(pts[0].fraction_remaining <= pts[1].fraction_remaining);
  }
  SUBCASE("each point matches a fresh fit and replay") {
    const std::vector<std::uint32_t> ks = {2, 4, 8, 16};
    const auto pts = k_sweep(ds, ks, 0.2, 3);
    REQUIRE(pts.size() == 4);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const auto model = kmeans_fit(*ds.semantic, {ks[i], 3, 100, 1e-4});
      CHECK(pts[i].k == ks[i]);
      CHECK(pts[i].objective == model.objective);
      CHECK(pts[i].fraction_remaining ==
            doctest::Approx(static_cast<double>(replay_kept(ds, model, 0.2)) / n));
    }
  }
}

TEST_CASE("table output") {
  const std::vector<RetentionPoint> rows = {{0.0, 1.0, 10}, {0.5, 0.25, 3}};
  const auto j = to_json(std::span<const RetentionPoint>(rows));
  REQUIRE(j.size() == 2);
  CHECK(j[1]["epsilon"] == 0.5);
  CHECK(j[1]["fraction_remaining"] == 0.25);
  const auto csv = to_csv(std::span<const RetentionPoint>(rows));
  CHECK(csv.rfind("epsilon,fraction_remaining", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
