#include "accessopt/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <nlohmann/json.hpp>

#include "accessopt/csvio.hpp"
#include "accessopt/errors.hpp"
#include "accessopt/evaluate.hpp"
#include "accessopt/geodata.hpp"

namespace accessopt::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  return path.is_absolute() ? path.string() : (base / path).lexically_normal().string();
}

void require_artifact(const std::string& path, const std::string& producer) {
  if (!fs::exists(path)) {
    throw PredecessorError("missing " + path + "; run `" + producer + "` first");
  }
}

void require_input(const std::string& path, const std::string& hint) {
  if (!fs::exists(path)) {
    throw PredecessorError("missing input " + path + "; " + hint);
  }
}

ingest::IngestConfig make_ingest_config(const PipelineConfig& cfg) {
  ingest::IngestConfig ic;
  ic.dbscan_epsilon = cfg.dbscan_epsilon;
  ic.dbscan_min_points = cfg.dbscan_min_points;
  ic.strict = cfg.strict_parse;
  ic.boundary = geodata::load_boundary(cfg.paths.boundary);
  ic.europe_side = geodata::load_boundary(cfg.paths.europe_side);
  ic.asia_side = geodata::load_boundary(cfg.paths.asia_side);
  return ic;
}

synth::ScenarioSpec make_scenario(const PipelineConfig& cfg) {
  synth::ScenarioSpec spec = synth::default_scenario(cfg.synth.seed);
  spec.tower_count = cfg.synth.tower_count;
  if (!cfg.synth.blobs.empty()) spec.blobs = cfg.synth.blobs;
  spec.calls_per_person_night = cfg.synth.calls_per_person_night;
  spec.day_call_multiplier = cfg.synth.day_call_multiplier;
  spec.noise = cfg.synth.noise;
  spec.period_start = cfg.synth.period_start;
  spec.period_days = cfg.synth.period_days;
  spec.near_duplicate_fraction = cfg.synth.near_duplicate_fraction;
  spec.dms_fraction = cfg.synth.dms_fraction;
  spec.missing_coord_fraction = cfg.synth.missing_coord_fraction;
  spec.current_facility_count = cfg.synth.current_facility_count;
  return spec;
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i != 0) out += ';';
    out += ids[i];
  }
  return out;
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": invalid JSON: " + e.what());
  }

  PipelineConfig cfg;
  std::vector<std::string> problems;
  const fs::path base = fs::path(path).has_parent_path() ? fs::path(path).parent_path() : ".";

  const auto& paths = doc.value("paths", ordered_json::object());
  cfg.paths.data_dir = resolve(base, paths.value("data_dir", std::string("data")));
  cfg.paths.towers = resolve(base, paths.value("towers", cfg.paths.data_dir + "/towers.csv"));
  cfg.paths.calls = resolve(base, paths.value("calls", cfg.paths.data_dir + "/calls.csv"));
  cfg.paths.boundary =
      resolve(base, paths.value("boundary", cfg.paths.data_dir + "/boundary.geojson"));
  cfg.paths.europe_side =
      resolve(base, paths.value("europe_side", cfg.paths.data_dir + "/europe_side.geojson"));
  cfg.paths.asia_side =
      resolve(base, paths.value("asia_side", cfg.paths.data_dir + "/asia_side.geojson"));
  cfg.paths.current_facilities = resolve(
      base, paths.value("current_facilities", cfg.paths.data_dir + "/current_facilities.csv"));
  cfg.paths.output_dir = resolve(base, paths.value("output_dir", std::string("out")));

  const auto& ing = doc.value("ingest", ordered_json::object());
  cfg.dbscan_epsilon = ing.value("dbscan_epsilon", 0.0005);
  cfg.dbscan_min_points = ing.value("dbscan_min_points", 1);
  cfg.strict_parse = ing.value("strict", false);
  if (!(cfg.dbscan_epsilon > 0.0)) problems.push_back("ingest.dbscan_epsilon must be positive");
  if (cfg.dbscan_min_points < 1) problems.push_back("ingest.dbscan_min_points must be >= 1");

  const auto& res = doc.value("residence", ordered_json::object());
  const std::string night_start = res.value("night_start", std::string("23:00"));
  const std::string night_end = res.value("night_end", std::string("08:00"));
  if (const auto t = civiltime::parse_time(night_start)) {
    cfg.residence.window.night_start = *t;
  } else {
    problems.push_back("residence.night_start is not a valid time");
  }
  if (const auto t = civiltime::parse_time(night_end)) {
    cfg.residence.window.night_end = *t;
  } else {
    problems.push_back("residence.night_end is not a valid time");
  }
  if (cfg.residence.window.night_start == cfg.residence.window.night_end) {
    problems.push_back("residence night window must have distinct start and end");
  }
  cfg.residence.emit_mode_locations = res.value("emit_mode_locations", true);
  cfg.residence.emit_tower_areas = res.value("emit_tower_areas", true);

  const auto& clu = doc.value("clustering", ordered_json::object());
  cfg.clustering.total_k = clu.value("total_k", 200);
  cfg.clustering.seed = clu.value("seed", 7ULL);
  cfg.clustering.max_iters = clu.value("max_iters", 300);
  cfg.clustering.tol = clu.value("tol", 1e-7);
  if (cfg.clustering.total_k < 2) problems.push_back("clustering.total_k must be >= 2");
  if (cfg.clustering.max_iters < 1) problems.push_back("clustering.max_iters must be >= 1");

  const auto& cst = doc.value("costs", ordered_json::object());
  cfg.costs.provider = cst.value("provider", std::string("synthetic"));
  cfg.costs.synthetic_speed_mps = cst.value("synthetic_speed_mps", 8.33);
  cfg.costs.departure = cst.value("departure", std::string("2018-12-10 10:00:00"));
  cfg.costs.batch_size = cst.value("batch_size", std::size_t{10});
  cfg.costs.rate_limit_per_s = cst.value("rate_limit_per_s", 50.0);
  if (cfg.costs.provider != "synthetic" && cfg.costs.provider != "http") {
    problems.push_back("costs.provider must be 'synthetic' or 'http'");
  }
  if (!(cfg.costs.synthetic_speed_mps > 0.0)) {
    problems.push_back("costs.synthetic_speed_mps must be positive");
  }
  if (!civiltime::parse_datetime(cfg.costs.departure)) {
    problems.push_back("costs.departure is not a valid datetime");
  }
  if (cfg.costs.batch_size == 0) problems.push_back("costs.batch_size must be positive");
  if (!(cfg.costs.rate_limit_per_s > 0.0)) {
    problems.push_back("costs.rate_limit_per_s must be positive");
  }
  const auto& http = cst.value("http", ordered_json::object());
  cfg.costs.http.endpoint = http.value("endpoint", std::string());
  cfg.costs.http.api_key_env = http.value("api_key_env", std::string("ACCESSOPT_API_KEY"));
  cfg.costs.http.rows_field = http.value("rows_field", std::string("rows"));
  cfg.costs.http.elements_field = http.value("elements_field", std::string("elements"));
  cfg.costs.http.status_field = http.value("status_field", std::string("status"));
  cfg.costs.http.ok_value = http.value("ok_value", std::string("OK"));
  cfg.costs.http.distance_field = http.value("distance_field", std::string("distance_m"));
  cfg.costs.http.duration_field = http.value("duration_field", std::string("duration_s"));
  if (cfg.costs.provider == "http" && cfg.costs.http.endpoint.empty()) {
    problems.push_back("costs.http.endpoint is required for the http provider");
  }

  const auto& sol = doc.value("solver", ordered_json::object());
  cfg.facility_count = sol.value("m", std::size_t{20});
  cfg.solver.epsilon = sol.value("epsilon", 1e-6);
  cfg.solver.node_budget = sol.value("node_budget", 500000ULL);
  cfg.solver.time_budget_s = sol.value("time_budget_s", 0.0);
  cfg.solver.subgrad_iters = sol.value("subgrad_iters", 1000);
  cfg.solver.root_iters = sol.value("root_iters", 3000);
  cfg.solver.halve_after = sol.value("halve_after", 30);
  cfg.solver.mu0 = sol.value("mu0", 2.0);
  cfg.solver.seed = sol.value("seed", 1ULL);
  cfg.solver.heuristic_restarts = sol.value("heuristic_restarts", 2ULL);
  if (cfg.facility_count < 1) problems.push_back("solver.m must be >= 1");
  if (!(cfg.solver.epsilon > 0.0)) problems.push_back("solver.epsilon must be positive");

  const auto& syn = doc.value("synth", ordered_json::object());
  cfg.synth.seed = syn.value("seed", 42ULL);
  cfg.synth.tower_count = syn.value("tower_count", std::size_t{1000});
  cfg.synth.calls_per_person_night = syn.value("calls_per_person_night", 1.2);
  cfg.synth.day_call_multiplier = syn.value("day_call_multiplier", 2.0);
  cfg.synth.noise = syn.value("noise", 0.1);
  cfg.synth.period_start = syn.value("period_start", std::string("2018-12-03"));
  cfg.synth.period_days = syn.value("period_days", 7);
  cfg.synth.near_duplicate_fraction = syn.value("near_duplicate_fraction", 0.05);
  cfg.synth.dms_fraction = syn.value("dms_fraction", 0.05);
  cfg.synth.missing_coord_fraction = syn.value("missing_coord_fraction", 0.02);
  cfg.synth.current_facility_count = syn.value("current_facility_count", std::size_t{20});
  if (syn.contains("blobs")) {
    for (const auto& b : syn["blobs"]) {
      synth::GaussianBlob blob;
      blob.center = {b.value("lat", 0.0), b.value("lon", 0.0)};
      blob.stddev_deg = b.value("stddev_deg", 0.02);
      blob.person_count = b.value("person_count", std::size_t{0});
      if (blob.person_count == 0) problems.push_back("synth blob person_count must be positive");
      if (!(blob.stddev_deg > 0.0)) problems.push_back("synth blob stddev_deg must be positive");
      cfg.synth.blobs.push_back(blob);
    }
  }
  if (cfg.synth.noise < 0.0 || cfg.synth.noise > 1.0) {
    problems.push_back("synth.noise must be in [0, 1]");
  }
  if (cfg.synth.period_days < 1) problems.push_back("synth.period_days must be >= 1");
  if (!civiltime::parse_date(cfg.synth.period_start)) {
    problems.push_back("synth.period_start is not a valid date");
  }

  if (!problems.empty()) {
    std::string msg = "config validation failed:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ValidationError(msg);
  }
  return cfg;
}

Artifacts artifacts(const PipelineConfig& cfg) {
  const std::string o = cfg.paths.output_dir;
  Artifacts a;
  a.ingest_towers = o + "/ingest/towers.csv";
  a.ingest_calls = o + "/ingest/calls.csv";
  a.ingest_errors = o + "/ingest/errors.txt";
  a.ingest_summary = o + "/ingest/summary.json";
  a.ingest_towers_geojson = o + "/ingest/towers.geojson";
  a.residence_table = o + "/residence/residence.csv";
  a.residence_coverage = o + "/residence/coverage.json";
  a.residence_tower_areas = o + "/residence/tower_areas.geojson";
  a.residence_modes = o + "/residence/mode_locations.csv";
  a.cluster_regions = o + "/cluster/regions.csv";
  a.cluster_regions_geojson = o + "/cluster/regions.geojson";
  a.cluster_centers_geojson = o + "/cluster/region_centers.geojson";
  a.costs_distance = o + "/costs/distance.cmx";
  a.costs_duration = o + "/costs/duration.cmx";
  a.solve_instance = o + "/solve/instance.txt";
  a.solution_distance = o + "/solve/solution_distance.json";
  a.solution_duration = o + "/solve/solution_duration.json";
  a.solve_pins_distance = o + "/solve/optimized_distance.geojson";
  a.solve_pins_duration = o + "/solve/optimized_duration.geojson";
  a.report_text = o + "/evaluate/report.txt";
  a.report_csv = o + "/evaluate/report.csv";
  a.current_pins_geojson = o + "/evaluate/current_facilities.geojson";
  return a;
}

void run_synth(const PipelineConfig& cfg) {
  const synth::ScenarioSpec spec = make_scenario(cfg);
  const auto paths = synth::generate(spec, cfg.paths.data_dir);
  std::cerr << "synth: wrote scenario under " << cfg.paths.data_dir << "\n";
  (void)paths;
}

void run_ingest(const PipelineConfig& cfg) {
  require_input(cfg.paths.towers, "run `synth` or point paths.towers at a tower file");
  require_input(cfg.paths.calls, "run `synth` or point paths.calls at a call file");
  require_input(cfg.paths.boundary, "run `synth` or supply a boundary polygon");
  require_input(cfg.paths.europe_side, "run `synth` or supply the europe side polygon");
  require_input(cfg.paths.asia_side, "run `synth` or supply the asia side polygon");

  const ingest::IngestConfig ic = make_ingest_config(cfg);
  auto parsed = ingest::parse_towers(cfg.paths.towers, ic.strict);
  const auto cleaned = ingest::clean_towers(parsed.records, ic);
  auto calls = ingest::parse_calls(cfg.paths.calls, cleaned.towers, ic.strict);

  const Artifacts a = artifacts(cfg);

  std::string towers_csv = "tower_id,latitude,longitude,partition,merged_site_ids\n";
  for (const auto& t : cleaned.towers) {
    towers_csv += t.tower_id + ',' + csvio::format_double(t.location.lat) + ',' +
                  csvio::format_double(t.location.lon) + ',' + ingest::partition_name(t.partition) +
                  ',' + join_ids(t.merged_site_ids) + '\n';
  }
  csvio::write_file(a.ingest_towers, towers_csv);

  std::string calls_csv = "caller_id,timestamp,tower_id\n";
  for (const auto& c : calls.records) {
    calls_csv += c.caller_id + ',' + civiltime::format_datetime(c.timestamp) + ',' + c.tower_id +
                 '\n';
  }
  csvio::write_file(a.ingest_calls, calls_csv);

  csvio::write_file(a.ingest_errors, parsed.errors.render() + calls.errors.render());

  ordered_json summary;
  summary["towers"] = {{"input_records", cleaned.stats.input_records},
                       {"dropped_no_coordinates", cleaned.stats.dropped_no_coordinates},
                       {"dropped_outside_boundary", cleaned.stats.dropped_outside_boundary},
                       {"dropped_no_partition", cleaned.stats.dropped_no_partition},
                       {"merged_groups", cleaned.stats.merged_groups},
                       {"surviving", cleaned.towers.size()}};
  summary["calls"] = {{"input_rows", calls.stats.input_rows},
                      {"kept", calls.stats.kept},
                      {"dropped_unresolved_site", calls.stats.dropped_unresolved_site},
                      {"dropped_non_refugee", calls.stats.dropped_non_refugee},
                      {"dropped_malformed", calls.stats.dropped_malformed}};
  summary["parse_errors"] = parsed.errors.entries.size() + calls.errors.entries.size();
  csvio::write_file(a.ingest_summary, summary.dump(2) + "\n");

  std::vector<geodata::PointFeature> points;
  for (const auto& t : cleaned.towers) {
    geodata::Properties props;
    props["tower_id"] = t.tower_id;
    props["partition"] = ingest::partition_name(t.partition);
    props["merged_count"] = t.merged_site_ids.size();
    points.push_back({t.location, std::move(props)});
  }
  geodata::write_points(a.ingest_towers_geojson, points);

  std::cerr << "ingest: " << cleaned.towers.size() << " towers, " << calls.records.size()
            << " calls kept\n";
}

void run_residence(const PipelineConfig& cfg) {
  const Artifacts a = artifacts(cfg);
  require_artifact(a.ingest_towers, "ingest");
  require_artifact(a.ingest_calls, "ingest");

  const auto towers = load_towers_artifact(a.ingest_towers);
  const auto calls = load_calls_artifact(a.ingest_calls);
  const auto night = residence::night_filter(calls, cfg.residence.window);
  const auto table = residence::residence_distribution(night);

  std::string table_csv = "tower_id,expected_residents\n";
  for (const auto& [tower, expected] : table.expected_residents) {
    table_csv += tower + ',' + csvio::format_double(expected) + '\n';
  }
  csvio::write_file(a.residence_table, table_csv);

  ordered_json coverage;
  std::set<std::string> subscribers;
  for (const auto& c : calls) subscribers.insert(c.caller_id);
  coverage["subscribers_total"] = subscribers.size();
  coverage["subscribers_with_night_calls"] = table.subscribers_with_night_calls();
  coverage["coverage"] = residence::coverage_ratio(calls, table);
  coverage["night_calls"] = night.size();
  coverage["total_expected_residents"] = table.total_expected();
  csvio::write_file(a.residence_coverage, coverage.dump(2) + "\n");

  if (cfg.residence.emit_tower_areas) {
    const geo::BoundaryPolygon boundary = geodata::load_boundary(cfg.paths.boundary);
    std::vector<geo::GeoPoint> sites;
    sites.reserve(towers.size());
    for (const auto& t : towers) sites.push_back(t.location);
    const auto diagram = geo::voronoi(sites, boundary);
    std::vector<geodata::PolygonFeature> cells;
    for (std::size_t i = 0; i < towers.size(); ++i) {
      geodata::Properties props;
      props["tower_id"] = towers[i].tower_id;
      const auto it = table.expected_residents.find(towers[i].tower_id);
      props["expected_residents"] = it == table.expected_residents.end() ? 0.0 : it->second;
      cells.push_back({diagram.cells[i], std::move(props)});
    }
    geodata::write_polygons(a.residence_tower_areas, cells);
  }

  if (cfg.residence.emit_mode_locations) {
    const auto modes = residence::mode_location(calls);
    std::string modes_csv = "caller_id,mode_tower_id\n";
    for (const auto& [subscriber, tower] : modes) modes_csv += subscriber + ',' + tower + '\n';
    csvio::write_file(a.residence_modes, modes_csv);
  }

  std::cerr << "residence: " << table.subscribers_with_night_calls() << " subscribers covered, "
            << table.expected_residents.size() << " towers with expected residents\n";
}

void run_cluster(const PipelineConfig& cfg) {
  const Artifacts a = artifacts(cfg);
  require_artifact(a.ingest_towers, "ingest");
  require_artifact(a.ingest_calls, "ingest");
  require_artifact(a.residence_table, "residence");

  const auto towers = load_towers_artifact(a.ingest_towers);
  const auto calls = load_calls_artifact(a.ingest_calls);
  const auto expected = load_residence_artifact(a.residence_table);

  residence::ResidenceTable table;
  table.expected_residents = expected;

  cluster::ClusterConfig cc = cfg.clustering;
  // Activity from all calls, not just night calls.
  std::map<std::string, ingest::Partition> partition_of;
  for (const auto& t : towers) partition_of[t.tower_id] = t.partition;
  for (const auto& c : calls) {
    const auto it = partition_of.find(c.tower_id);
    if (it != partition_of.end()) cc.partition_activity[it->second] += 1;
  }

  const geo::BoundaryPolygon boundary = geodata::load_boundary(cfg.paths.boundary);
  const auto regions = cluster::build_regions(towers, table, cc, boundary);

  std::string regions_csv = "region_id,partition,center_lat,center_lon,weight,member_tower_ids\n";
  for (const auto& r : regions) {
    regions_csv += std::to_string(r.region_id) + ',' + ingest::partition_name(r.partition) + ',' +
                   csvio::format_double(r.center.lat) + ',' + csvio::format_double(r.center.lon) +
                   ',' + csvio::format_double(r.weight) + ',' + join_ids(r.member_tower_ids) +
                   '\n';
  }
  csvio::write_file(a.cluster_regions, regions_csv);

  std::vector<geodata::PolygonFeature> polys;
  std::vector<geodata::PointFeature> centers;
  for (const auto& r : regions) {
    geodata::Properties props;
    props["region_id"] = r.region_id;
    props["weight"] = r.weight;
    props["partition"] = ingest::partition_name(r.partition);
    centers.push_back({r.center, props});
    polys.push_back({r.polygon, std::move(props)});
  }
  geodata::write_polygons(a.cluster_regions_geojson, polys);
  geodata::write_points(a.cluster_centers_geojson, centers);

  std::cerr << "cluster: " << regions.size() << " regions\n";
}

void run_costs(const PipelineConfig& cfg) {
  const Artifacts a = artifacts(cfg);
  require_artifact(a.cluster_regions, "cluster");

  const auto regions = load_regions_artifact(a.cluster_regions);
  std::vector<geo::GeoPoint> centers;
  centers.reserve(regions.size());
  for (const auto& r : regions) centers.push_back(r.center);

  std::unique_ptr<costs::CostProvider> provider;
  if (cfg.costs.provider == "http") {
    provider = costs::http_provider(cfg.costs.http);
  } else {
    provider = costs::synthetic_provider(cfg.costs.synthetic_speed_mps);
  }

  costs::BuildOptions opts;
  opts.batch_size = cfg.costs.batch_size;
  opts.rate_limit_per_s = cfg.costs.rate_limit_per_s;
  const auto pair = costs::build_matrices(centers, *provider, cfg.costs.departure, opts);
  costs::save_matrix(pair.distance, a.costs_distance);
  costs::save_matrix(pair.duration, a.costs_duration);

  std::cerr << "costs: " << pair.distance.n << "x" << pair.distance.n << " matrices, "
            << pair.distance.missing_count() << " imputed cells\n";
}

namespace {

pmedian::PMedianInstance make_instance(const std::vector<RegionRecord>& regions,
                                       costs::CostMatrix matrix, std::size_t m) {
  pmedian::PMedianInstance inst;
  inst.n = regions.size();
  inst.m = m;
  for (const auto& r : regions) {
    inst.weights.push_back(r.weight);
    inst.labels.push_back(std::to_string(r.region_id));
  }
  inst.costs = std::move(matrix);
  return inst;
}

void write_solution(const std::string& path, const pmedian::FacilitySolution& sol,
                    const std::vector<RegionRecord>& regions, costs::CostKind kind,
                    std::size_t m) {
  ordered_json doc;
  doc["kind"] = costs::cost_kind_name(kind);
  doc["n"] = regions.size();
  doc["m"] = m;
  doc["objective"] = sol.objective;
  doc["proof"] = sol.proof == pmedian::Proof::exact ? "exact" : "heuristic-with-gap";
  doc["gap"] = sol.gap;
  doc["nodes_explored"] = sol.nodes_explored;
  doc["open_regions"] = ordered_json::array();
  for (std::size_t j : sol.open_set) doc["open_regions"].push_back(regions[j].region_id);
  doc["assignment"] = ordered_json::array();
  for (std::size_t i = 0; i < sol.assignment.size(); ++i) {
    doc["assignment"].push_back({{"region", regions[i].region_id},
                                 {"facility", regions[sol.assignment[i]].region_id}});
  }
  csvio::write_file(path, doc.dump(2) + "\n");
}

void write_pins(const std::string& path, const pmedian::FacilitySolution& sol,
                const std::vector<RegionRecord>& regions, const std::string& scenario) {
  std::vector<geodata::PointFeature> pins;
  for (std::size_t j : sol.open_set) {
    geodata::Properties props;
    props["region_id"] = regions[j].region_id;
    props["weight"] = regions[j].weight;
    props["scenario"] = scenario;
    pins.push_back({regions[j].center, std::move(props)});
  }
  geodata::write_points(path, pins);
}

}  // namespace

void run_solve(const PipelineConfig& cfg) {
  const Artifacts a = artifacts(cfg);
  require_artifact(a.cluster_regions, "cluster");
  require_artifact(a.costs_distance, "costs");
  require_artifact(a.costs_duration, "costs");

  const auto regions = load_regions_artifact(a.cluster_regions);
  const auto D = costs::load_matrix(a.costs_distance);
  const auto T = costs::load_matrix(a.costs_duration);
  if (D.n != regions.size() || T.n != regions.size()) {
    throw ValidationError("solve: matrix dimension does not match region count; re-run costs");
  }

  // Instance export: weights plus references to the cost matrix caches.
  {
    std::string text = "accessopt-pmedian-instance v1\n";
    text += "n " + std::to_string(regions.size()) + '\n';
    text += "m " + std::to_string(cfg.facility_count) + '\n';
    text += "distance_matrix " + a.costs_distance + '\n';
    text += "duration_matrix " + a.costs_duration + '\n';
    text += "region_id weight\n";
    for (const auto& r : regions) {
      text += std::to_string(r.region_id) + ' ' + csvio::format_double(r.weight) + '\n';
    }
    csvio::write_file(a.solve_instance, text);
  }

  for (const auto kind : {costs::CostKind::distance_m, costs::CostKind::duration_s}) {
    const bool is_distance = kind == costs::CostKind::distance_m;
    auto inst = make_instance(regions, is_distance ? D : T, cfg.facility_count);
    pmedian::SolveOptions opts = cfg.solver;
    const auto sol = pmedian::solve(inst, opts);
    write_solution(is_distance ? a.solution_distance : a.solution_duration, sol, regions, kind,
                   cfg.facility_count);
    write_pins(is_distance ? a.solve_pins_distance : a.solve_pins_duration, sol, regions,
               is_distance ? "optimized-distance" : "optimized-duration");
    std::cerr << "solve(" << costs::cost_kind_name(kind) << "): objective " << sol.objective
              << ", " << (sol.proof == pmedian::Proof::exact ? "exact" : "heuristic") << ", gap "
              << sol.gap << ", nodes " << sol.nodes_explored << "\n";
  }
}

void run_evaluate(const PipelineConfig& cfg) {
  const Artifacts a = artifacts(cfg);
  require_artifact(a.cluster_regions, "cluster");
  require_artifact(a.costs_distance, "costs");
  require_artifact(a.costs_duration, "costs");
  require_artifact(a.solution_distance, "solve");
  require_artifact(a.solution_duration, "solve");
  require_input(cfg.paths.current_facilities,
                "run `synth` or point paths.current_facilities at a facility list");

  const auto regions = load_regions_artifact(a.cluster_regions);
  const auto D = costs::load_matrix(a.costs_distance);
  const auto T = costs::load_matrix(a.costs_duration);

  std::vector<geo::GeoPoint> centers;
  std::vector<double> weights;
  for (const auto& r : regions) {
    centers.push_back(r.center);
    weights.push_back(r.weight);
  }

  const auto pins = load_facilities_csv(cfg.paths.current_facilities);
  std::vector<geo::GeoPoint> pin_points;
  for (const auto& p : pins) pin_points.push_back(p.location);
  const geo::BoundaryPolygon boundary = geodata::load_boundary(cfg.paths.boundary);
  const auto current = evaluate::map_current_facilities(pin_points, centers, &boundary);

  std::vector<evaluate::Scenario> scenarios;
  scenarios.push_back({"current", current});
  scenarios.push_back({"optimized-distance", load_solution_open_set(a.solution_distance)});
  scenarios.push_back({"optimized-duration", load_solution_open_set(a.solution_duration)});

  // Solution files store region ids; map back to indices.
  std::map<int, std::size_t> index_of;
  for (std::size_t i = 0; i < regions.size(); ++i) index_of[regions[i].region_id] = i;
  for (auto& s : scenarios) {
    if (s.label == "current") continue;
    for (auto& j : s.open_set) {
      const auto it = index_of.find(static_cast<int>(j));
      if (it == index_of.end()) {
        throw ValidationError("evaluate: solution references unknown region id");
      }
      j = it->second;
    }
  }

  const auto report = evaluate::access_report(weights, scenarios, D, T);
  csvio::write_file(a.report_text, evaluate::render_text(report));
  csvio::write_file(a.report_csv, evaluate::render_csv(report));

  std::vector<geodata::PointFeature> features;
  for (const auto& p : pins) {
    geodata::Properties props;
    props["facility_id"] = p.id;
    props["scenario"] = "current";
    features.push_back({p.location, std::move(props)});
  }
  geodata::write_points(a.current_pins_geojson, features);

  std::cout << evaluate::render_text(report);
}

void run_all(const PipelineConfig& cfg) {
  run_ingest(cfg);
  run_residence(cfg);
  run_cluster(cfg);
  run_costs(cfg);
  run_solve(cfg);
  run_evaluate(cfg);
}

std::vector<ingest::TowerSite> load_towers_artifact(const std::string& path) {
  const auto lines = csvio::read_lines(path);
  if (lines.empty() || lines[0] != "tower_id,latitude,longitude,partition,merged_site_ids") {
    throw IoError(path + ": not a tower artifact");
  }
  std::vector<ingest::TowerSite> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = csvio::split(lines[i]);
    if (fields.size() != 5) throw IoError(path + ": malformed line " + std::to_string(i + 1));
    ingest::TowerSite t;
    t.tower_id = fields[0];
    const auto lat = csvio::parse_double(fields[1]);
    const auto lon = csvio::parse_double(fields[2]);
    const auto partition = ingest::partition_from_name(fields[3]);
    if (!lat || !lon || !partition) {
      throw IoError(path + ": malformed line " + std::to_string(i + 1));
    }
    t.location = {*lat, *lon};
    t.partition = *partition;
    t.merged_site_ids = csvio::split(fields[4], ';');
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<ingest::CallRecord> load_calls_artifact(const std::string& path) {
  const auto lines = csvio::read_lines(path);
  if (lines.empty() || lines[0] != "caller_id,timestamp,tower_id") {
    throw IoError(path + ": not a call artifact");
  }
  std::vector<ingest::CallRecord> out;
  out.reserve(lines.size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = csvio::split(lines[i]);
    if (fields.size() != 3) throw IoError(path + ": malformed line " + std::to_string(i + 1));
    ingest::CallRecord c;
    c.caller_id = fields[0];
    const auto ts = civiltime::parse_datetime(fields[1]);
    if (!ts) throw IoError(path + ": malformed timestamp at line " + std::to_string(i + 1));
    c.timestamp = *ts;
    c.tower_id = fields[2];
    out.push_back(std::move(c));
  }
  return out;
}

std::map<std::string, double> load_residence_artifact(const std::string& path) {
  const auto lines = csvio::read_lines(path);
  if (lines.empty() || lines[0] != "tower_id,expected_residents") {
    throw IoError(path + ": not a residence artifact");
  }
  std::map<std::string, double> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = csvio::split(lines[i]);
    const auto v = fields.size() == 2 ? csvio::parse_double(fields[1]) : std::nullopt;
    if (!v) throw IoError(path + ": malformed line " + std::to_string(i + 1));
    out[fields[0]] = *v;
  }
  return out;
}

std::vector<RegionRecord> load_regions_artifact(const std::string& path) {
  const auto lines = csvio::read_lines(path);
  if (lines.empty() ||
      lines[0] != "region_id,partition,center_lat,center_lon,weight,member_tower_ids") {
    throw IoError(path + ": not a region artifact");
  }
  std::vector<RegionRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = csvio::split(lines[i]);
    if (fields.size() != 6) throw IoError(path + ": malformed line " + std::to_string(i + 1));
    RegionRecord r;
    const auto id = csvio::parse_int(fields[0]);
    const auto partition = ingest::partition_from_name(fields[1]);
    const auto lat = csvio::parse_double(fields[2]);
    const auto lon = csvio::parse_double(fields[3]);
    const auto weight = csvio::parse_double(fields[4]);
    if (!id || !partition || !lat || !lon || !weight) {
      throw IoError(path + ": malformed line " + std::to_string(i + 1));
    }
    r.region_id = static_cast<int>(*id);
    r.partition = *partition;
    r.center = {*lat, *lon};
    r.weight = *weight;
    r.member_tower_ids = csvio::split(fields[5], ';');
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(),
            [](const RegionRecord& a, const RegionRecord& b) { return a.region_id < b.region_id; });
  return out;
}

std::vector<FacilityPin> load_facilities_csv(const std::string& path) {
  const auto lines = csvio::read_lines(path);
  if (lines.empty() || lines[0] != "facility_id,latitude,longitude") {
    throw IoError(path + ": expected header 'facility_id,latitude,longitude'");
  }
  std::vector<FacilityPin> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = csvio::split(lines[i]);
    if (fields.size() != 3) throw IoError(path + ": malformed line " + std::to_string(i + 1));
    const auto lat = csvio::parse_double(fields[1]);
    const auto lon = csvio::parse_double(fields[2]);
    if (!lat || !lon) throw IoError(path + ": malformed line " + std::to_string(i + 1));
    out.push_back({fields[0], {*lat, *lon}});
  }
  if (out.empty()) throw IoError(path + ": no facilities listed");
  return out;
}

std::vector<std::size_t> load_solution_open_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": invalid JSON: " + e.what());
  }
  if (!doc.contains("open_regions")) throw IoError(path + ": missing open_regions");
  std::vector<std::size_t> out;
  for (const auto& v : doc["open_regions"]) out.push_back(v.get<std::size_t>());
  return out;
}

}  // namespace accessopt::pipeline
