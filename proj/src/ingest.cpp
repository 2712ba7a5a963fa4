#include "accessopt/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

#include "accessopt/csvio.hpp"
#include "accessopt/errors.hpp"

namespace accessopt::ingest {

namespace {

constexpr const char* kTowerHeader = "site_id,latitude,longitude,city,district";
constexpr const char* kCallHeader = "caller_id,caller_group,timestamp,site_id,call_type";

// Accepts decimal degrees ("41.0082") or colon-separated DMS ("41:0:29.5:N").
std::optional<double> parse_coordinate(const std::string& text, bool is_latitude,
                                       std::string* error) {
  if (auto dec = csvio::parse_double(text)) {
    return dec;
  }
  const auto parts = csvio::split(text, ':');
  if (parts.size() != 4) {
    *error = "unrecognized coordinate syntax '" + text + "'";
    return std::nullopt;
  }
  const auto deg = csvio::parse_int(parts[0]);
  const auto min = csvio::parse_int(parts[1]);
  const auto sec = csvio::parse_double(parts[2]);
  if (!deg || !min || !sec || parts[3].size() != 1) {
    *error = "malformed DMS coordinate '" + text + "'";
    return std::nullopt;
  }
  const char hemisphere = parts[3][0];
  const bool lat_hemi = hemisphere == 'N' || hemisphere == 'S';
  if (lat_hemi != is_latitude) {
    *error = "DMS hemisphere does not match coordinate axis in '" + text + "'";
    return std::nullopt;
  }
  geo::DmsCoordinate dms;
  dms.degrees = static_cast<int>(*deg);
  dms.minutes = static_cast<int>(*min);
  dms.seconds = *sec;
  dms.hemisphere = hemisphere;
  try {
    return geo::dms_to_decimal(dms);
  } catch (const ValidationError& e) {
    *error = std::string(e.what()) + " in '" + text + "'";
    return std::nullopt;
  }
}

void report(ErrorReport& errors, const std::string& file, std::size_t line,
            const std::string& message, bool strict) {
  if (strict) throw IoError(file + ":" + std::to_string(line) + ": " + message);
  errors.entries.push_back({file, line, message});
}

// Grid-bucketed DBSCAN on the lon/lat plane. Neighborhoods use dist <= eps
// and count the point itself, so min_points == 1 makes every point a core
// point and clustering reduces to connected components of the eps-graph.
std::vector<int> dbscan(const std::vector<geo::GeoPoint>& pts, double eps, int min_points) {
  const std::size_t n = pts.size();
  const double eps2 = eps * eps;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid;
  grid.reserve(n * 2);
  const auto cell_key = [&](double lon, double lat) {
    const auto gx = static_cast<std::int32_t>(std::floor(lon / eps));
    const auto gy = static_cast<std::int32_t>(std::floor(lat / eps));
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(gx)) << 32) |
           static_cast<std::uint32_t>(gy);
  };
  for (std::size_t i = 0; i < n; ++i) {
    grid[cell_key(pts[i].lon, pts[i].lat)].push_back(static_cast<std::uint32_t>(i));
  }

  const auto neighbors = [&](std::size_t i) {
    std::vector<std::uint32_t> out;
    const auto gx = static_cast<std::int32_t>(std::floor(pts[i].lon / eps));
    const auto gy = static_cast<std::int32_t>(std::floor(pts[i].lat / eps));
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        const std::uint64_t key =
            (static_cast<std::uint64_t>(static_cast<std::uint32_t>(gx + dx)) << 32) |
            static_cast<std::uint32_t>(gy + dy);
        const auto it = grid.find(key);
        if (it == grid.end()) continue;
        for (std::uint32_t j : it->second) {
          const double ddx = pts[i].lon - pts[j].lon;
          const double ddy = pts[i].lat - pts[j].lat;
          if (ddx * ddx + ddy * ddy <= eps2) out.push_back(j);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  };

  constexpr int kUnvisited = -1;
  constexpr int kNoise = -2;
  std::vector<int> label(n, kUnvisited);
  int cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    auto seed = neighbors(i);
    if (static_cast<int>(seed.size()) < min_points) {
      label[i] = kNoise;
      continue;
    }
    label[i] = cluster;
    std::deque<std::uint32_t> queue(seed.begin(), seed.end());
    while (!queue.empty()) {
      const std::uint32_t j = queue.front();
      queue.pop_front();
      if (label[j] == kNoise) label[j] = cluster;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = cluster;
      auto reach = neighbors(j);
      if (static_cast<int>(reach.size()) >= min_points) {
        queue.insert(queue.end(), reach.begin(), reach.end());
      }
    }
    ++cluster;
  }
  // Noise points stand alone as singleton sites rather than being dropped.
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] == kNoise) label[i] = cluster++;
  }
  return label;
}

}  // namespace

const char* partition_name(Partition p) { return p == Partition::Europe ? "europe" : "asia"; }

std::optional<Partition> partition_from_name(const std::string& name) {
  if (name == "europe") return Partition::Europe;
  if (name == "asia") return Partition::Asia;
  return std::nullopt;
}

std::string ErrorReport::render() const {
  std::string out;
  for (const ErrorEntry& e : entries) {
    out += e.file + ":" + std::to_string(e.line) + ": " + e.message + "\n";
  }
  return out;
}

ParsedTowers parse_towers(const std::string& path, bool strict) {
  const auto lines = csvio::read_lines(path);
  if (lines.empty()) throw IoError(path + ": empty file");
  if (lines[0] != kTowerHeader) {
    throw IoError(path + ": expected header '" + std::string(kTowerHeader) + "'");
  }
  ParsedTowers out;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string& line = lines[li];
    if (line.empty()) continue;
    const auto fields = csvio::split(line);
    if (fields.size() != 5) {
      report(out.errors, path, li + 1, "expected 5 fields, got " + std::to_string(fields.size()),
             strict);
      continue;
    }
    RawTowerRecord rec;
    rec.site_id = fields[0];
    if (rec.site_id.empty()) {
      report(out.errors, path, li + 1, "empty site_id", strict);
      continue;
    }
    if (const auto it = seen.find(rec.site_id); it != seen.end()) {
      report(out.errors, path, li + 1,
             "duplicate site_id '" + rec.site_id + "' (first at line " +
                 std::to_string(it->second) + ")",
             strict);
      continue;
    }
    const bool lat_empty = fields[1].empty();
    const bool lon_empty = fields[2].empty();
    if (lat_empty != lon_empty) {
      report(out.errors, path, li + 1, "one of latitude/longitude missing", strict);
      continue;
    }
    if (!lat_empty) {
      std::string err;
      const auto lat = parse_coordinate(fields[1], true, &err);
      if (!lat) {
        report(out.errors, path, li + 1, err, strict);
        continue;
      }
      const auto lon = parse_coordinate(fields[2], false, &err);
      if (!lon) {
        report(out.errors, path, li + 1, err, strict);
        continue;
      }
      geo::GeoPoint p{*lat, *lon};
      try {
        geo::validate_point(p);
      } catch (const ValidationError& e) {
        report(out.errors, path, li + 1, e.what(), strict);
        continue;
      }
      rec.location = p;
    }
    rec.declared_city = fields[3];
    rec.declared_district = fields[4];
    seen.emplace(rec.site_id, li + 1);
    out.records.push_back(std::move(rec));
  }
  return out;
}

CleanResult clean_towers(std::vector<RawTowerRecord> raw, const IngestConfig& cfg) {
  if (!(cfg.dbscan_epsilon > 0.0)) throw ValidationError("dbscan_epsilon must be positive");
  if (cfg.dbscan_min_points < 1) throw ValidationError("dbscan_min_points must be >= 1");
  geo::validate_polygon(cfg.boundary);
  geo::validate_polygon(cfg.europe_side);
  geo::validate_polygon(cfg.asia_side);

  CleanResult out;
  out.stats.input_records = raw.size();

  std::vector<RawTowerRecord> located;
  located.reserve(raw.size());
  for (auto& rec : raw) {
    if (rec.location.has_value()) {
      located.push_back(std::move(rec));
    } else {
      ++out.stats.dropped_no_coordinates;
    }
  }
  // Sorting by site_id fixes the DBSCAN seeding order, so cluster labels and
  // centroids are reproducible regardless of file ordering.
  std::sort(located.begin(), located.end(),
            [](const RawTowerRecord& a, const RawTowerRecord& b) { return a.site_id < b.site_id; });

  std::vector<geo::GeoPoint> pts;
  pts.reserve(located.size());
  for (const auto& rec : located) pts.push_back(*rec.location);
  const auto labels = dbscan(pts, cfg.dbscan_epsilon, cfg.dbscan_min_points);

  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < located.size(); ++i) groups[labels[i]].push_back(i);

  for (const auto& [label, members] : groups) {
    TowerSite site;
    double lat = 0.0, lon = 0.0;
    for (std::size_t idx : members) {
      site.merged_site_ids.push_back(located[idx].site_id);
      lat += pts[idx].lat;
      lon += pts[idx].lon;
    }
    std::sort(site.merged_site_ids.begin(), site.merged_site_ids.end());
    site.tower_id = site.merged_site_ids.front();
    site.location = {lat / static_cast<double>(members.size()),
                     lon / static_cast<double>(members.size())};
    if (members.size() > 1) ++out.stats.merged_groups;

    if (!geo::contains(cfg.boundary, site.location)) {
      ++out.stats.dropped_outside_boundary;
      continue;
    }
    if (geo::contains(cfg.europe_side, site.location)) {
      site.partition = Partition::Europe;
    } else if (geo::contains(cfg.asia_side, site.location)) {
      site.partition = Partition::Asia;
    } else {
      ++out.stats.dropped_no_partition;
      continue;
    }
    out.towers.push_back(std::move(site));
  }

  if (out.towers.empty()) throw Error("no towers survive cleaning");
  std::sort(out.towers.begin(), out.towers.end(),
            [](const TowerSite& a, const TowerSite& b) { return a.tower_id < b.tower_id; });
  return out;
}

std::map<std::string, std::string> site_to_tower(const std::vector<TowerSite>& towers) {
  std::map<std::string, std::string> out;
  for (const TowerSite& t : towers) {
    for (const std::string& sid : t.merged_site_ids) out.emplace(sid, t.tower_id);
  }
  return out;
}

ParsedCalls parse_calls(const std::string& path, const std::vector<TowerSite>& towers,
                        bool strict) {
  const auto lines = csvio::read_lines(path);
  if (lines.empty()) throw IoError(path + ": empty file");
  if (lines[0] != kCallHeader) {
    throw IoError(path + ": expected header '" + std::string(kCallHeader) + "'");
  }
  const auto towermap = site_to_tower(towers);

  ParsedCalls out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string& line = lines[li];
    if (line.empty()) continue;
    ++out.stats.input_rows;
    const auto fields = csvio::split(line);
    if (fields.size() != 5) {
      ++out.stats.dropped_malformed;
      report(out.errors, path, li + 1, "expected 5 fields, got " + std::to_string(fields.size()),
             strict);
      continue;
    }
    CallRecord rec;
    rec.caller_id = fields[0];
    if (rec.caller_id.empty()) {
      ++out.stats.dropped_malformed;
      report(out.errors, path, li + 1, "empty caller_id", strict);
      continue;
    }
    if (fields[1] == "refugee") {
      rec.caller_group = CallerGroup::refugee;
    } else if (fields[1] == "non-refugee") {
      rec.caller_group = CallerGroup::non_refugee;
    } else {
      ++out.stats.dropped_malformed;
      report(out.errors, path, li + 1, "unknown caller_group '" + fields[1] + "'", strict);
      continue;
    }
    const auto ts = civiltime::parse_datetime(fields[2]);
    if (!ts) {
      ++out.stats.dropped_malformed;
      report(out.errors, path, li + 1, "malformed timestamp '" + fields[2] + "'", strict);
      continue;
    }
    rec.timestamp = *ts;
    // The direction flag is parsed for schema completeness only.
    if (fields[4] == "inbound") {
      rec.direction = CallDirection::inbound;
    } else if (fields[4] == "outbound") {
      rec.direction = CallDirection::outbound;
    } else {
      ++out.stats.dropped_malformed;
      report(out.errors, path, li + 1, "unknown call_type '" + fields[4] + "'", strict);
      continue;
    }
    if (rec.caller_group == CallerGroup::non_refugee) {
      ++out.stats.dropped_non_refugee;
      continue;
    }
    const auto it = towermap.find(fields[3]);
    if (it == towermap.end()) {
      ++out.stats.dropped_unresolved_site;
      continue;
    }
    rec.tower_id = it->second;
    out.records.push_back(std::move(rec));
    ++out.stats.kept;
  }
  return out;
}

}  // namespace accessopt::ingest
