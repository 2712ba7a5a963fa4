#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "accessopt/geo.hpp"

namespace accessopt::synth {

struct GaussianBlob {
  geo::GeoPoint center;
  double stddev_deg = 0.02;
  std::size_t person_count = 0;
};

// Synthetic two-sided city with known per-subscriber home towers, emitting
// exactly the files the ingest stage consumes.
struct ScenarioSpec {
  std::uint64_t seed = 42;
  geo::BoundaryPolygon boundary;
  geo::BoundaryPolygon europe_side;
  geo::BoundaryPolygon asia_side;
  std::size_t tower_count = 1000;
  std::vector<GaussianBlob> blobs;
  double calls_per_person_night = 1.2;  // Poisson mean per night
  double day_call_multiplier = 2.0;     // day call volume relative to night
  double noise = 0.1;                   // night calls made away from home
  std::string period_start = "2018-12-03";
  int period_days = 7;
  double near_duplicate_fraction = 0.05;  // towers duplicated within merge radius
  double dms_fraction = 0.05;             // towers written in DMS syntax
  double missing_coord_fraction = 0.02;   // towers without coordinates
  std::size_t current_facility_count = 20;
};

// The paper-shaped default: two partitions with a 65/35 person split,
// 1,000 towers, 20,000 subscribers.
ScenarioSpec default_scenario(std::uint64_t seed = 42);

struct GeneratedPaths {
  std::string towers;
  std::string calls;
  std::string ground_truth;
  std::string boundary;
  std::string europe_side;
  std::string asia_side;
  std::string current_facilities;
};

// Writes all scenario files under out_dir. Deterministic for a fixed seed.
// Throws ValidationError when a blob center falls outside the boundary.
GeneratedPaths generate(const ScenarioSpec& spec, const std::string& out_dir);

// Reads a ground-truth file back: caller_id -> home site_id.
std::map<std::string, std::string> load_ground_truth(const std::string& path);

}  // namespace accessopt::synth
