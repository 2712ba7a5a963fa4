#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "accessopt/csvio.hpp"
#include "accessopt/errors.hpp"
#include "accessopt/geodata.hpp"
#include "accessopt/pipeline.hpp"

using namespace accessopt;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A config for a small but complete pipeline run.
std::string write_small_config(const fs::path& dir) {
  const std::string config = R"({
  "paths": {"data_dir": "data", "output_dir": "out"},
  "clustering": {"total_k": 12, "seed": 5},
  "solver": {"m": 3, "epsilon": 1e-6},
  "synth": {
    "seed": 11,
    "tower_count": 120,
    "blobs": [
      {"lat": 41.02, "lon": 28.78, "stddev_deg": 0.03, "person_count": 400},
      {"lat": 41.0, "lon": 29.15, "stddev_deg": 0.03, "person_count": 200}
    ],
    "calls_per_person_night": 1.5,
    "period_days": 3,
    "noise": 0.1
  }
})";
  const auto path = dir / "config.json";
  csvio::write_file(path.string(), config);
  return path.string();
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("config loading reports all problems at once") {
    const auto dir = temp_dir("accessopt_cfg");
    const auto path = dir / "bad.json";
    csvio::write_file(path.string(), R"({
      "ingest": {"dbscan_epsilon": -1},
      "clustering": {"total_k": 1},
      "solver": {"m": 0},
      "synth": {"noise": 3.0}
    })");
    try {
      pipeline::load_config(path.string());
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("dbscan_epsilon") != std::string::npos);
      CHECK(msg.find("total_k") != std::string::npos);
      CHECK(msg.find("solver.m") != std::string::npos);
      CHECK(msg.find("noise") != std::string::npos);
    }
    fs::remove_all(dir);
  }

  TEST_CASE("stages demand their predecessors") {
    const auto dir = temp_dir("accessopt_predecessor");
    const auto cfg = pipeline::load_config(write_small_config(dir));
    CHECK_THROWS_AS(pipeline::run_ingest(cfg), PredecessorError);   // no data yet
    CHECK_THROWS_AS(pipeline::run_residence(cfg), PredecessorError);
    CHECK_THROWS_AS(pipeline::run_cluster(cfg), PredecessorError);
    CHECK_THROWS_AS(pipeline::run_costs(cfg), PredecessorError);
    CHECK_THROWS_AS(pipeline::run_solve(cfg), PredecessorError);
    CHECK_THROWS_AS(pipeline::run_evaluate(cfg), PredecessorError);
    fs::remove_all(dir);
  }

  TEST_CASE("full chain produces valid artifacts") {
    const auto dir = temp_dir("accessopt_chain");
    const auto cfg = pipeline::load_config(write_small_config(dir));
    pipeline::run_synth(cfg);
    pipeline::run_all(cfg);

    const auto a = pipeline::artifacts(cfg);
    // Geodata schema checks: parseable, closed rings, properties present.
    CHECK(geodata::validate_feature_collection(a.ingest_towers_geojson,
                                               {"tower_id", "partition"}) > 0);
    CHECK(geodata::validate_feature_collection(a.residence_tower_areas,
                                               {"tower_id", "expected_residents"}) > 0);
    CHECK(geodata::validate_feature_collection(a.cluster_regions_geojson,
                                               {"region_id", "weight", "partition"}) == 12);
    CHECK(geodata::validate_feature_collection(a.cluster_centers_geojson, {"region_id"}) == 12);
    CHECK(geodata::validate_feature_collection(a.solve_pins_distance, {"region_id", "scenario"}) ==
          3);
    CHECK(geodata::validate_feature_collection(a.solve_pins_duration, {"region_id", "scenario"}) ==
          3);
    CHECK(geodata::validate_feature_collection(a.current_pins_geojson, {"facility_id"}) > 0);

    // Regions conserve residence mass.
    const auto regions = pipeline::load_regions_artifact(a.cluster_regions);
    const auto residents = pipeline::load_residence_artifact(a.residence_table);
    double region_mass = 0.0, tower_mass = 0.0;
    for (const auto& r : regions) region_mass += r.weight;
    for (const auto& [tower, v] : residents) tower_mass += v;
    CHECK(region_mass == doctest::Approx(tower_mass).epsilon(1e-6));

    // The report exists and has the three scenario rows.
    const std::string report = csvio::read_file(a.report_csv);
    CHECK(report.find("current,") != std::string::npos);
    CHECK(report.find("optimized-distance,") != std::string::npos);
    CHECK(report.find("optimized-duration,") != std::string::npos);

    // Matrices round-trip through their caches.
    const auto D = costs::load_matrix(a.costs_distance);
    CHECK(D.n == regions.size());
    CHECK(D.kind == costs::CostKind::distance_m);

    fs::remove_all(dir);
  }

  TEST_CASE("re-running a stage with unchanged inputs is byte-identical") {
    const auto dir = temp_dir("accessopt_rerun");
    const auto cfg = pipeline::load_config(write_small_config(dir));
    pipeline::run_synth(cfg);
    pipeline::run_ingest(cfg);
    pipeline::run_residence(cfg);
    pipeline::run_cluster(cfg);
    const auto a = pipeline::artifacts(cfg);
    const std::string before = csvio::read_file(a.cluster_regions);
    const std::string before_geo = csvio::read_file(a.cluster_regions_geojson);
    pipeline::run_cluster(cfg);
    CHECK(csvio::read_file(a.cluster_regions) == before);
    CHECK(csvio::read_file(a.cluster_regions_geojson) == before_geo);
    fs::remove_all(dir);
  }
}
