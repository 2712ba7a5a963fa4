#include <doctest.h>

#include <cmath>
#include <limits>

#include "accessopt/cluster.hpp"
#include "accessopt/errors.hpp"
#include "accessopt/rng.hpp"

using namespace accessopt;
using cluster::ClusterConfig;
using cluster::WeightedPoint;
using ingest::Partition;

namespace {

// Exhaustive best-inertia oracle for tiny instances: every assignment of
// points to k clusters, centroids at the weighted means.
double brute_force_inertia(const std::vector<WeightedPoint>& pts, int k) {
  const std::size_t n = pts.size();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < n; ++i) combos *= k;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t code = 0; code < combos; ++code) {
    std::size_t c = code;
    std::vector<int> assign(n);
    for (std::size_t i = 0; i < n; ++i) {
      assign[i] = static_cast<int>(c % k);
      c /= k;
    }
    std::vector<double> sx(k, 0), sy(k, 0), sw(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sx[assign[i]] += pts[i].weight * pts[i].point.lon;
      sy[assign[i]] += pts[i].weight * pts[i].point.lat;
      sw[assign[i]] += pts[i].weight;
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (sw[assign[i]] == 0.0) continue;
      const double cx = sx[assign[i]] / sw[assign[i]];
      const double cy = sy[assign[i]] / sw[assign[i]];
      const double dx = pts[i].point.lon - cx;
      const double dy = pts[i].point.lat - cy;
      inertia += pts[i].weight * (dx * dx + dy * dy);
    }
    best = std::min(best, inertia);
  }
  return best;
}

}  // namespace

TEST_SUITE("cluster") {
  TEST_CASE("allocate_k reproduces the 70/130 continental split") {
    const auto out = cluster::allocate_k(200, {{Partition::Asia, 35}, {Partition::Europe, 65}});
    CHECK(out.at(Partition::Asia) == 70);
    CHECK(out.at(Partition::Europe) == 130);
  }

  TEST_CASE("allocate_k equal shares") {
    const auto out = cluster::allocate_k(2, {{Partition::Asia, 50}, {Partition::Europe, 50}});
    CHECK(out.at(Partition::Asia) == 1);
    CHECK(out.at(Partition::Europe) == 1);
  }

  TEST_CASE("allocate_k largest remainder") {
    // 10 * 0.26 = 2.6 and 10 * 0.74 = 7.4: the larger remainder wins the
    // leftover cluster.
    const auto out = cluster::allocate_k(10, {{Partition::Asia, 26}, {Partition::Europe, 74}});
    CHECK(out.at(Partition::Asia) == 3);
    CHECK(out.at(Partition::Europe) == 7);
  }

  TEST_CASE("allocate_k sums to total and keeps every partition populated") {
    Rng rng(55);
    for (int rep = 0; rep < 200; ++rep) {
      const int total = 2 + static_cast<int>(rng.uniform_index(300));
      std::map<Partition, std::uint64_t> counts{
          {Partition::Asia, 1 + rng.uniform_index(100000)},
          {Partition::Europe, 1 + rng.uniform_index(100000)}};
      const auto out = cluster::allocate_k(total, counts);
      CHECK(out.at(Partition::Asia) + out.at(Partition::Europe) == total);
      CHECK(out.at(Partition::Asia) >= 1);
      CHECK(out.at(Partition::Europe) >= 1);
    }
  }

  TEST_CASE("k=1 converges to the weighted mean") {
    const std::vector<WeightedPoint> pts = {
        {{0.0, 0.0}, 1.0}, {{0.0, 1.0}, 3.0}, {{1.0, 0.0}, 0.0}};
    const auto res = cluster::weighted_kmeans(pts, 1, {});
    // Weighted mean: lon = (0*1 + 1*3 + 0*0)/4, lat = 0.
    CHECK(res.centroids[0].lon == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(res.centroids[0].lat == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("all weight on one point pins the centroid") {
    const std::vector<WeightedPoint> pts = {
        {{0.3, 0.4}, 5.0}, {{0.9, 0.9}, 0.0}, {{0.1, 0.2}, 0.0}};
    const auto res = cluster::weighted_kmeans(pts, 1, {});
    CHECK(res.centroids[0].lat == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(res.centroids[0].lon == doctest::Approx(0.4).epsilon(1e-12));
  }

  TEST_CASE("matches the exhaustive-partition oracle on 6 points") {
    const std::vector<WeightedPoint> pts = {{{0.0, 0.0}, 1.0}, {{0.1, 0.1}, 1.0},
                                            {{0.0, 0.2}, 1.0}, {{5.0, 5.0}, 1.0},
                                            {{5.1, 4.9}, 1.0}, {{4.9, 5.2}, 1.0}};
    const double oracle = brute_force_inertia(pts, 2);
    const auto res = cluster::weighted_kmeans(pts, 2, {});
    CHECK(res.inertia == doctest::Approx(oracle).epsilon(1e-9));
  }

  TEST_CASE("validation") {
    const std::vector<WeightedPoint> pts = {{{0, 0}, 1.0}, {{1, 1}, 1.0}};
    CHECK_THROWS_AS(cluster::weighted_kmeans(pts, 3, {}), ValidationError);
    CHECK_THROWS_AS(cluster::weighted_kmeans(pts, 0, {}), ValidationError);
  }

  TEST_CASE("all-zero weights fall back to unweighted clustering") {
    const std::vector<WeightedPoint> pts = {{{0, 0}, 0.0}, {{0, 1}, 0.0}, {{4, 4}, 0.0}};
    const auto res = cluster::weighted_kmeans(pts, 1, {});
    CHECK(res.fell_back_unweighted);
    CHECK(res.centroids[0].lon == doctest::Approx(5.0 / 3.0));
  }

  TEST_CASE("inertia is non-increasing across Lloyd iterations") {
    Rng rng(808);
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<WeightedPoint> pts;
      const int n = 20 + static_cast<int>(rng.uniform_index(60));
      for (int i = 0; i < n; ++i) {
        pts.push_back({{rng.uniform(0, 1), rng.uniform(0, 1)}, rng.uniform(0, 5)});
      }
      ClusterConfig cfg;
      cfg.seed = rep;
      const int k = 1 + static_cast<int>(rng.uniform_index(8));
      const auto res = cluster::weighted_kmeans(pts, k, cfg);
      for (std::size_t i = 1; i < res.inertia_trace.size(); ++i) {
        CHECK(res.inertia_trace[i] <=
              res.inertia_trace[i - 1] + 1e-9 * std::max(1.0, res.inertia_trace[i - 1]));
      }
    }
  }

  TEST_CASE("integer weights equal replicated unit-weight copies") {
    Rng rng(99);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<WeightedPoint> weighted;
      std::vector<WeightedPoint> replicated;
      const int n = 6 + static_cast<int>(rng.uniform_index(10));
      for (int i = 0; i < n; ++i) {
        const geo::GeoPoint p{rng.uniform(0, 1), rng.uniform(0, 1)};
        const int w = 1 + static_cast<int>(rng.uniform_index(4));
        weighted.push_back({p, static_cast<double>(w)});
        for (int c = 0; c < w; ++c) replicated.push_back({p, 1.0});
      }
      // Same explicit initial centers align the Lloyd dynamics.
      std::vector<geo::GeoPoint> init = {weighted[0].point, weighted[1].point,
                                         weighted[2].point};
      const auto a = cluster::weighted_kmeans(weighted, 3, {}, &init);
      const auto b = cluster::weighted_kmeans(replicated, 3, {}, &init);
      REQUIRE(a.centroids.size() == b.centroids.size());
      for (std::size_t j = 0; j < a.centroids.size(); ++j) {
        CHECK(a.centroids[j].lat == doctest::Approx(b.centroids[j].lat).epsilon(1e-9));
        CHECK(a.centroids[j].lon == doctest::Approx(b.centroids[j].lon).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("determinism under fixed seed") {
    Rng rng(4);
    std::vector<WeightedPoint> pts;
    for (int i = 0; i < 80; ++i) {
      pts.push_back({{rng.uniform(0, 1), rng.uniform(0, 1)}, rng.uniform(0, 2)});
    }
    ClusterConfig cfg;
    cfg.seed = 42;
    const auto a = cluster::weighted_kmeans(pts, 5, cfg);
    const auto b = cluster::weighted_kmeans(pts, 5, cfg);
    CHECK(a.centroids.size() == b.centroids.size());
    for (std::size_t j = 0; j < a.centroids.size(); ++j) {
      CHECK(a.centroids[j].lat == b.centroids[j].lat);
      CHECK(a.centroids[j].lon == b.centroids[j].lon);
    }
    CHECK(a.inertia == b.inertia);
  }

  TEST_CASE("build_regions conserves mass and separates partitions") {
    geo::BoundaryPolygon boundary{"city", {{{0, 0}, {0, 10}, {10, 10}, {10, 0}, {0, 0}}}};
    std::vector<ingest::TowerSite> towers;
    residence::ResidenceTable table;
    Rng rng(31);
    for (int i = 0; i < 60; ++i) {
      ingest::TowerSite t;
      t.tower_id = "T" + std::to_string(100 + i);
      const bool europe = i < 40;
      t.location = {rng.uniform(0.5, 9.5), europe ? rng.uniform(0.5, 4.5) : rng.uniform(5.5, 9.5)};
      t.partition = europe ? Partition::Europe : Partition::Asia;
      t.merged_site_ids = {t.tower_id};
      towers.push_back(t);
      table.expected_residents[t.tower_id] = rng.uniform(0, 10);
    }
    ClusterConfig cfg;
    cfg.total_k = 20;
    cfg.partition_activity = {{Partition::Asia, 35}, {Partition::Europe, 65}};
    const auto regions = cluster::build_regions(towers, table, cfg, boundary);
    REQUIRE(regions.size() == 20);

    int asia = 0, europe = 0;
    double total_weight = 0.0;
    for (const auto& r : regions) {
      (r.partition == Partition::Asia ? asia : europe) += 1;
      total_weight += r.weight;
      for (const auto& tid : r.member_tower_ids) {
        const auto it = std::find_if(towers.begin(), towers.end(),
                                     [&](const auto& t) { return t.tower_id == tid; });
        REQUIRE(it != towers.end());
        CHECK(it->partition == r.partition);
      }
    }
    CHECK(asia == 7);    // allocate_k(20, 35/65)
    CHECK(europe == 13);
    CHECK(total_weight == doctest::Approx(table.total_expected()).epsilon(1e-6));
  }

  TEST_CASE("build_regions rejects a partition without towers") {
    geo::BoundaryPolygon boundary{"city", {{{0, 0}, {0, 10}, {10, 10}, {10, 0}, {0, 0}}}};
    std::vector<ingest::TowerSite> towers;
    residence::ResidenceTable table;
    for (int i = 0; i < 5; ++i) {
      ingest::TowerSite t;
      t.tower_id = "T" + std::to_string(i);
      t.location = {1.0 + i, 1.0};
      t.partition = Partition::Europe;
      towers.push_back(t);
    }
    ClusterConfig cfg;
    cfg.total_k = 4;
    cfg.partition_activity = {{Partition::Asia, 35}, {Partition::Europe, 65}};
    CHECK_THROWS_AS(cluster::build_regions(towers, table, cfg, boundary), ValidationError);
  }
}
