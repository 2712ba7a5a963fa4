#include "accessopt/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include "accessopt/errors.hpp"
#include "accessopt/kernels.hpp"
#include "accessopt/rng.hpp"

namespace accessopt::cluster {

namespace {

// Weighted k-means++: first center by weight, then by weight * D^2 to the
// nearest chosen center. Falls back to uniform choice among unchosen points
// when all scores vanish.
std::vector<geo::GeoPoint> kmeanspp_seed(const std::vector<WeightedPoint>& points,
                                         const std::vector<double>& weights, int k, Rng& rng) {
  const std::size_t n = points.size();
  std::vector<geo::GeoPoint> centers;
  centers.reserve(k);
  std::vector<bool> chosen(n, false);

  const auto pick_fallback = [&]() -> std::size_t {
    for (std::size_t i = 0; i < n; ++i) {
      if (!chosen[i]) return i;
    }
    throw ValidationError("kmeans++: ran out of candidate points");
  };

  std::vector<double> score = weights;
  double total = std::accumulate(score.begin(), score.end(), 0.0);
  std::size_t first = total > 0.0 ? rng.weighted_index(score) : pick_fallback();
  chosen[first] = true;
  centers.push_back(points[first].point);

  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers.size()) < k) {
    const geo::GeoPoint& c = centers.back();
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = points[i].point.lon - c.lon;
      const double dy = points[i].point.lat - c.lat;
      d2[i] = std::min(d2[i], dx * dx + dy * dy);
      score[i] = chosen[i] ? 0.0 : weights[i] * d2[i];
    }
    total = std::accumulate(score.begin(), score.end(), 0.0);
    std::size_t next = total > 0.0 ? rng.weighted_index(score) : pick_fallback();
    chosen[next] = true;
    centers.push_back(points[next].point);
  }
  return centers;
}

}  // namespace

std::map<ingest::Partition, int> allocate_k(
    int total_k, const std::map<ingest::Partition, std::uint64_t>& activity_counts) {
  if (activity_counts.empty()) throw ValidationError("allocate_k: no partitions");
  if (total_k < static_cast<int>(activity_counts.size())) {
    throw ValidationError("allocate_k: total_k below partition count");
  }
  std::uint64_t total_activity = 0;
  for (const auto& [p, c] : activity_counts) {
    if (c == 0) throw ValidationError("allocate_k: zero activity in a partition");
    total_activity += c;
  }

  struct Part {
    ingest::Partition p;
    int base;
    double remainder;
  };
  std::vector<Part> parts;
  int assigned = 0;
  for (const auto& [p, c] : activity_counts) {
    const double exact =
        static_cast<double>(total_k) * static_cast<double>(c) / static_cast<double>(total_activity);
    const int base = static_cast<int>(std::floor(exact));
    parts.push_back({p, base, exact - base});
    assigned += base;
  }
  // Largest remainder first; partition order breaks exact ties.
  std::stable_sort(parts.begin(), parts.end(),
                   [](const Part& a, const Part& b) { return a.remainder > b.remainder; });
  for (int i = 0; assigned < total_k; ++i, ++assigned) {
    parts[i % parts.size()].base += 1;
  }
  // Guarantee one cluster per partition, stealing from the largest share.
  for (auto& p : parts) {
    if (p.base == 0) {
      auto richest = std::max_element(parts.begin(), parts.end(),
                                      [](const Part& a, const Part& b) { return a.base < b.base; });
      richest->base -= 1;
      p.base += 1;
    }
  }
  std::map<ingest::Partition, int> out;
  for (const auto& p : parts) out[p.p] = p.base;
  return out;
}

KMeansResult weighted_kmeans(const std::vector<WeightedPoint>& points, int k,
                             const ClusterConfig& cfg,
                             const std::vector<geo::GeoPoint>* initial_centers) {
  const std::size_t n = points.size();
  if (k < 1) throw ValidationError("weighted_kmeans: k must be >= 1");
  if (static_cast<std::size_t>(k) > n) {
    throw ValidationError("weighted_kmeans: k exceeds point count");
  }

  KMeansResult result;
  std::vector<double> weights(n);
  bool any_positive = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = points[i].weight;
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValidationError("weighted_kmeans: weights must be finite and non-negative");
    }
    weights[i] = w;
    any_positive |= w > 0.0;
  }
  if (!any_positive) {
    std::cerr << "weighted_kmeans: all weights zero, falling back to unweighted clustering\n";
    std::fill(weights.begin(), weights.end(), 1.0);
    result.fell_back_unweighted = true;
  }

  std::vector<geo::GeoPoint> centers;
  if (initial_centers != nullptr) {
    if (static_cast<int>(initial_centers->size()) != k) {
      throw ValidationError("weighted_kmeans: initial center count differs from k");
    }
    centers = *initial_centers;
  } else {
    Rng rng(cfg.seed);
    centers = kmeanspp_seed(points, weights, k, rng);
  }

  // Structure-of-arrays buffers for the assignment kernel.
  std::vector<double> px(n), py(n);
  for (std::size_t i = 0; i < n; ++i) {
    px[i] = points[i].point.lon;
    py[i] = points[i].point.lat;
  }
  std::vector<double> cx(k), cy(k);
  std::vector<std::int32_t> assign(n);
  std::vector<double> d2(n);

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    for (int j = 0; j < k; ++j) {
      cx[j] = centers[j].lon;
      cy[j] = centers[j].lat;
    }
    kernels::nearest_center(px.data(), py.data(), n, cx.data(), cy.data(),
                            static_cast<std::size_t>(k), assign.data(), d2.data());
    const double inertia = kernels::dot(weights.data(), d2.data(), n);
    result.inertia_trace.push_back(inertia);
    result.iterations = iter + 1;

    // Weighted mean per cluster.
    std::vector<double> sx(k, 0.0), sy(k, 0.0), sw(k, 0.0);
    std::vector<std::int32_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const int c = assign[i];
      sx[c] += weights[i] * px[i];
      sy[c] += weights[i] * py[i];
      sw[c] += weights[i];
      count[c] += 1;
    }

    double max_shift = 0.0;
    std::vector<bool> reseeded(n, false);
    for (int j = 0; j < k; ++j) {
      geo::GeoPoint next = centers[j];
      if (count[j] == 0) {
        // Re-seed an empty cluster at the point contributing most inertia;
        // a point reseeds at most one cluster per iteration.
        std::size_t worst = n;
        double worst_cost = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (reseeded[i]) continue;
          const double cost = weights[i] * d2[i];
          if (cost > worst_cost) {
            worst_cost = cost;
            worst = i;
          }
        }
        if (worst == n) throw Error("weighted_kmeans: cannot re-seed empty cluster");
        reseeded[worst] = true;
        next = points[worst].point;
      } else if (sw[j] > 0.0) {
        next = {sy[j] / sw[j], sx[j] / sw[j]};
      }
      // Clusters holding only zero-weight points keep their centroid.
      const double dx = next.lon - centers[j].lon;
      const double dy = next.lat - centers[j].lat;
      max_shift = std::max(max_shift, std::sqrt(dx * dx + dy * dy));
      centers[j] = next;
    }
    if (max_shift < cfg.tol) break;
  }

  // Final assignment against the converged centers.
  for (int j = 0; j < k; ++j) {
    cx[j] = centers[j].lon;
    cy[j] = centers[j].lat;
  }
  kernels::nearest_center(px.data(), py.data(), n, cx.data(), cy.data(),
                          static_cast<std::size_t>(k), assign.data(), d2.data());
  result.inertia = kernels::dot(weights.data(), d2.data(), n);
  result.centroids = std::move(centers);
  result.assignment = std::move(assign);
  return result;
}

std::vector<ResidentialRegion> build_regions(const std::vector<ingest::TowerSite>& towers,
                                             const residence::ResidenceTable& residents,
                                             const ClusterConfig& cfg,
                                             const geo::BoundaryPolygon& boundary) {
  if (towers.empty()) throw ValidationError("build_regions: no towers");

  const auto k_by_partition = allocate_k(cfg.total_k, cfg.partition_activity);

  std::map<ingest::Partition, std::vector<std::size_t>> by_partition;
  for (std::size_t i = 0; i < towers.size(); ++i) {
    by_partition[towers[i].partition].push_back(i);
  }
  for (const auto& [partition, k] : k_by_partition) {
    const auto it = by_partition.find(partition);
    if (it == by_partition.end() || it->second.empty()) {
      throw ValidationError(std::string("build_regions: partition '") +
                            ingest::partition_name(partition) + "' has no towers");
    }
    if (static_cast<int>(it->second.size()) < k) {
      throw ValidationError(std::string("build_regions: partition '") +
                            ingest::partition_name(partition) + "' has fewer towers than clusters");
    }
  }

  std::vector<ResidentialRegion> regions;
  int next_id = 0;
  std::uint64_t partition_index = 0;
  for (const auto& [partition, k] : k_by_partition) {
    const auto& idxs = by_partition.at(partition);
    std::vector<WeightedPoint> pts;
    pts.reserve(idxs.size());
    for (std::size_t i : idxs) {
      const auto it = residents.expected_residents.find(towers[i].tower_id);
      pts.push_back({towers[i].location, it == residents.expected_residents.end() ? 0.0 : it->second});
    }
    ClusterConfig sub = cfg;
    sub.seed = cfg.seed + partition_index;
    const auto km = weighted_kmeans(pts, k, sub);

    std::vector<ResidentialRegion> partition_regions(k);
    for (int j = 0; j < k; ++j) {
      partition_regions[j].center = km.centroids[j];
      partition_regions[j].partition = partition;
    }
    for (std::size_t local = 0; local < idxs.size(); ++local) {
      auto& region = partition_regions[km.assignment[local]];
      region.weight += pts[local].weight;
      region.member_tower_ids.push_back(towers[idxs[local]].tower_id);
    }
    for (auto& region : partition_regions) {
      std::sort(region.member_tower_ids.begin(), region.member_tower_ids.end());
      region.region_id = next_id++;
      regions.push_back(std::move(region));
    }
    ++partition_index;
  }

  std::vector<geo::GeoPoint> centers;
  centers.reserve(regions.size());
  for (const auto& r : regions) centers.push_back(r.center);
  const auto diagram = geo::voronoi(centers, boundary);
  for (std::size_t i = 0; i < regions.size(); ++i) regions[i].polygon = diagram.cells[i];
  return regions;
}

}  // namespace accessopt::cluster
