#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "accessopt/cluster.hpp"
#include "accessopt/costs.hpp"
#include "accessopt/ingest.hpp"
#include "accessopt/pmedian.hpp"
#include "accessopt/residence.hpp"
#include "accessopt/synth.hpp"

namespace accessopt::pipeline {

struct PathsConfig {
  std::string data_dir = "data";
  std::string towers;
  std::string calls;
  std::string boundary;
  std::string europe_side;
  std::string asia_side;
  std::string current_facilities;
  std::string output_dir = "out";
};

struct CostsConfig {
  std::string provider = "synthetic";  // "synthetic" or "http"
  double synthetic_speed_mps = 8.33;
  std::string departure = "2018-12-10 10:00:00";
  std::size_t batch_size = 10;
  double rate_limit_per_s = 50.0;
  costs::HttpProviderConfig http;
};

struct SynthConfig {
  std::uint64_t seed = 42;
  std::size_t tower_count = 1000;
  std::vector<synth::GaussianBlob> blobs;  // empty -> built-in defaults
  double calls_per_person_night = 1.2;
  double day_call_multiplier = 2.0;
  double noise = 0.1;
  std::string period_start = "2018-12-03";
  int period_days = 7;
  double near_duplicate_fraction = 0.05;
  double dms_fraction = 0.05;
  double missing_coord_fraction = 0.02;
  std::size_t current_facility_count = 20;
};

struct ResidenceStageConfig {
  residence::ResidenceConfig window;
  bool emit_mode_locations = true;
  bool emit_tower_areas = true;
};

struct PipelineConfig {
  PathsConfig paths;
  ingest::IngestConfig ingest;  // boundary polygons are loaded per stage
  double dbscan_epsilon = 0.0005;
  int dbscan_min_points = 1;
  bool strict_parse = false;
  ResidenceStageConfig residence;
  cluster::ClusterConfig clustering;
  CostsConfig costs;
  pmedian::SolveOptions solver;
  std::size_t facility_count = 20;  // m
  SynthConfig synth;
};

// Reads the JSON config; relative paths resolve against the config file's
// directory. All validation problems are reported together in one
// ValidationError.
PipelineConfig load_config(const std::string& path);

// Full paths of every stage artifact under output_dir.
struct Artifacts {
  std::string ingest_towers;
  std::string ingest_calls;
  std::string ingest_errors;
  std::string ingest_summary;
  std::string ingest_towers_geojson;
  std::string residence_table;
  std::string residence_coverage;
  std::string residence_tower_areas;
  std::string residence_modes;
  std::string cluster_regions;
  std::string cluster_regions_geojson;
  std::string cluster_centers_geojson;
  std::string costs_distance;
  std::string costs_duration;
  std::string solve_instance;
  std::string solution_distance;
  std::string solution_duration;
  std::string solve_pins_distance;
  std::string solve_pins_duration;
  std::string report_text;
  std::string report_csv;
  std::string current_pins_geojson;
};

Artifacts artifacts(const PipelineConfig& cfg);

void run_synth(const PipelineConfig& cfg);
void run_ingest(const PipelineConfig& cfg);
void run_residence(const PipelineConfig& cfg);
void run_cluster(const PipelineConfig& cfg);
void run_costs(const PipelineConfig& cfg);
void run_solve(const PipelineConfig& cfg);
void run_evaluate(const PipelineConfig& cfg);
void run_all(const PipelineConfig& cfg);

// Artifact readers shared by stages and tests.
std::vector<ingest::TowerSite> load_towers_artifact(const std::string& path);
std::vector<ingest::CallRecord> load_calls_artifact(const std::string& path);
std::map<std::string, double> load_residence_artifact(const std::string& path);

struct RegionRecord {
  int region_id = 0;
  ingest::Partition partition = ingest::Partition::Europe;
  geo::GeoPoint center;
  double weight = 0.0;
  std::vector<std::string> member_tower_ids;
};
std::vector<RegionRecord> load_regions_artifact(const std::string& path);

struct FacilityPin {
  std::string id;
  geo::GeoPoint location;
};
std::vector<FacilityPin> load_facilities_csv(const std::string& path);

std::vector<std::size_t> load_solution_open_set(const std::string& path);

}  // namespace accessopt::pipeline
