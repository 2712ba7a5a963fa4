#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "accessopt/civiltime.hpp"
#include "accessopt/geo.hpp"

namespace accessopt::ingest {

enum class Partition { Europe, Asia };

const char* partition_name(Partition p);
std::optional<Partition> partition_from_name(const std::string& name);

// One line of the tower lookup table, before cleaning.
struct RawTowerRecord {
  std::string site_id;
  std::optional<geo::GeoPoint> location;
  std::string declared_city;
  std::string declared_district;
};

// A surviving tower after merging and boundary filtering.
struct TowerSite {
  std::string tower_id;  // lexicographically smallest merged site_id
  geo::GeoPoint location;  // centroid of the merged group
  std::vector<std::string> merged_site_ids;  // sorted
  Partition partition = Partition::Europe;
};

enum class CallerGroup { refugee, non_refugee };
enum class CallDirection { inbound, outbound };

struct CallRecord {
  std::string caller_id;
  CallerGroup caller_group = CallerGroup::refugee;
  civiltime::CivilDateTime timestamp;
  std::string tower_id;
  // Parsed for completeness; the flag is unreliable and never used.
  CallDirection direction = CallDirection::outbound;
};

struct IngestConfig {
  double dbscan_epsilon = 0.0005;  // coordinate degrees
  int dbscan_min_points = 1;
  bool strict = false;  // abort on first malformed line instead of reporting
  geo::BoundaryPolygon boundary;
  geo::BoundaryPolygon europe_side;
  geo::BoundaryPolygon asia_side;
};

struct ErrorEntry {
  std::string file;
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ErrorReport {
  std::vector<ErrorEntry> entries;

  std::string render() const;  // "file:line: message" per entry
};

struct ParsedTowers {
  std::vector<RawTowerRecord> records;
  ErrorReport errors;
};

// Delimited text, header "site_id,latitude,longitude,city,district".
// Coordinates are decimal degrees or D:M:S:H. Lenient mode records malformed
// lines and continues; strict mode throws on the first one.
ParsedTowers parse_towers(const std::string& path, bool strict = false);

struct CleanStats {
  std::size_t input_records = 0;
  std::size_t dropped_no_coordinates = 0;
  std::size_t dropped_outside_boundary = 0;  // whole merged groups
  std::size_t dropped_no_partition = 0;
  std::size_t merged_groups = 0;  // groups with more than one member
};

struct CleanResult {
  std::vector<TowerSite> towers;  // sorted by tower_id
  CleanStats stats;
};

// Drops coordinate-less records, merges near-duplicates with DBSCAN
// (Euclidean on lon/lat, radius cfg.dbscan_epsilon), keeps merged sites whose
// centroid lies inside the study boundary and tags the continent side.
// Declared city/district strings are never consulted. Throws Error when no
// tower survives.
CleanResult clean_towers(std::vector<RawTowerRecord> raw, const IngestConfig& cfg);

std::map<std::string, std::string> site_to_tower(const std::vector<TowerSite>& towers);

struct CallStats {
  std::size_t input_rows = 0;
  std::size_t kept = 0;
  std::size_t dropped_unresolved_site = 0;
  std::size_t dropped_non_refugee = 0;
  std::size_t dropped_malformed = 0;
};

struct ParsedCalls {
  std::vector<CallRecord> records;
  CallStats stats;
  ErrorReport errors;
};

// Delimited text, header "caller_id,caller_group,timestamp,site_id,call_type".
// Inner join against the surviving towers: rows whose site_id does not map to
// a tower are dropped and counted. Only refugee rows are retained.
ParsedCalls parse_calls(const std::string& path, const std::vector<TowerSite>& towers,
                        bool strict = false);

}  // namespace accessopt::ingest
