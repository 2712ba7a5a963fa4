#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "accessopt/geo.hpp"
#include "accessopt/ingest.hpp"
#include "accessopt/residence.hpp"

namespace accessopt::cluster {

struct ClusterConfig {
  int total_k = 200;
  // Call counts per partition; allocate_k turns these into shares.
  std::map<ingest::Partition, std::uint64_t> partition_activity;
  std::uint64_t seed = 7;
  int max_iters = 300;
  double tol = 1e-7;  // max centroid shift, degrees
};

// Largest-remainder split of total_k proportional to activity counts; every
// partition receives at least one cluster and the parts sum to total_k.
std::map<ingest::Partition, int> allocate_k(
    int total_k, const std::map<ingest::Partition, std::uint64_t>& activity_counts);

struct WeightedPoint {
  geo::GeoPoint point;
  double weight = 0.0;
};

struct KMeansResult {
  std::vector<geo::GeoPoint> centroids;
  std::vector<std::int32_t> assignment;  // per input point
  double inertia = 0.0;                  // weighted, at convergence
  std::vector<double> inertia_trace;     // one entry per Lloyd iteration
  int iterations = 0;
  bool fell_back_unweighted = false;  // all weights were zero
};

// Lloyd's algorithm with weights in both the objective and the centroid
// updates. Seeding is weighted k-means++ from cfg.seed unless explicit
// initial centers are given. Deterministic for a fixed seed and input order.
KMeansResult weighted_kmeans(const std::vector<WeightedPoint>& points, int k,
                             const ClusterConfig& cfg,
                             const std::vector<geo::GeoPoint>* initial_centers = nullptr);

struct ResidentialRegion {
  int region_id = 0;
  geo::GeoPoint center;
  double weight = 0.0;  // sum of member towers' expected residents
  ingest::Partition partition = ingest::Partition::Europe;
  std::vector<std::string> member_tower_ids;  // sorted
  geo::Ring polygon;                          // Voronoi cell among region centers
};

// Splits the cluster budget across partitions by call activity, runs
// weighted k-means per partition with tower weights taken from the residence
// table, and attaches Voronoi polygons over all region centers.
std::vector<ResidentialRegion> build_regions(const std::vector<ingest::TowerSite>& towers,
                                             const residence::ResidenceTable& residents,
                                             const ClusterConfig& cfg,
                                             const geo::BoundaryPolygon& boundary);

}  // namespace accessopt::cluster
