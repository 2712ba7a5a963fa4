#include "accessopt/synth.hpp"

#include <algorithm>
#include <cstdio>

#include "accessopt/civiltime.hpp"
#include "accessopt/csvio.hpp"
#include "accessopt/errors.hpp"
#include "accessopt/kernels.hpp"
#include "accessopt/rng.hpp"

namespace accessopt::synth {

namespace {

geo::Ring rectangle(double lon0, double lat0, double lon1, double lat1) {
  return {{lat0, lon0}, {lat0, lon1}, {lat1, lon1}, {lat1, lon0}, {lat0, lon0}};
}

std::string coordinate_text(double value, bool is_latitude, bool as_dms) {
  if (!as_dms) return csvio::format_double(value);
  const geo::DmsCoordinate dms = geo::decimal_to_dms(value, is_latitude);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d:%d:%s:%c", dms.degrees, dms.minutes,
                csvio::format_double(dms.seconds).c_str(), dms.hemisphere);
  return buf;
}

geo::GeoPoint sample_in_polygon(const geo::BoundaryPolygon& poly, Rng& rng, double min_lon,
                                double max_lon, double min_lat, double max_lat) {
  for (int tries = 0; tries < 100000; ++tries) {
    const geo::GeoPoint p{rng.uniform(min_lat, max_lat), rng.uniform(min_lon, max_lon)};
    if (geo::contains(poly, p)) return p;
  }
  throw Error("synth: rejection sampling failed; polygon area too small?");
}

struct Bounds {
  double min_lon, max_lon, min_lat, max_lat;
};

Bounds bounds_of(const geo::BoundaryPolygon& poly) {
  Bounds b{1e9, -1e9, 1e9, -1e9};
  for (const auto& ring : poly.rings) {
    for (const auto& p : ring) {
      b.min_lon = std::min(b.min_lon, p.lon);
      b.max_lon = std::max(b.max_lon, p.lon);
      b.min_lat = std::min(b.min_lat, p.lat);
      b.max_lat = std::max(b.max_lat, p.lat);
    }
  }
  return b;
}

}  // namespace

ScenarioSpec default_scenario(std::uint64_t seed) {
  ScenarioSpec spec;
  spec.seed = seed;
  spec.boundary = {"city", {rectangle(28.6, 40.8, 29.4, 41.3)}};
  spec.europe_side = {"europe-side", {rectangle(28.6, 40.8, 29.05, 41.3)}};
  spec.asia_side = {"asia-side", {rectangle(29.05, 40.8, 29.4, 41.3)}};
  // Two-continent population, roughly 65% of people (and therefore calls)
  // on the western side.
  spec.blobs = {
      {{41.02, 28.78}, 0.030, 6000},
      {{41.16, 28.85}, 0.040, 4000},
      {{41.05, 28.95}, 0.025, 3000},
      {{41.00, 29.15}, 0.030, 4500},
      {{41.10, 29.25}, 0.040, 2500},
  };
  return spec;
}

GeneratedPaths generate(const ScenarioSpec& spec, const std::string& out_dir) {
  geo::validate_polygon(spec.boundary);
  geo::validate_polygon(spec.europe_side);
  geo::validate_polygon(spec.asia_side);
  if (spec.tower_count < 2) throw ValidationError("synth: tower_count must be >= 2");
  if (spec.blobs.empty()) throw ValidationError("synth: need at least one population blob");
  if (spec.noise < 0.0 || spec.noise > 1.0) throw ValidationError("synth: noise must be in [0, 1]");
  if (spec.period_days < 1) throw ValidationError("synth: period_days must be >= 1");
  const auto period_start = civiltime::parse_date(spec.period_start);
  if (!period_start) throw ValidationError("synth: bad period_start date");
  for (const auto& blob : spec.blobs) {
    if (blob.person_count == 0) throw ValidationError("synth: blob person_count must be positive");
    if (!geo::contains(spec.boundary, blob.center)) {
      throw ValidationError("synth: blob center outside boundary");
    }
    if (!geo::contains(spec.europe_side, blob.center) &&
        !geo::contains(spec.asia_side, blob.center)) {
      throw ValidationError("synth: blob center outside both continent sides");
    }
  }

  Rng rng(spec.seed);
  const Bounds bb = bounds_of(spec.boundary);

  struct Tower {
    std::string site_id;
    bool has_coords = true;
    geo::GeoPoint location;
    bool as_dms = false;
    std::string city = "istanbul";
    std::string district;
  };
  std::vector<Tower> towers;
  std::size_t next_site = 0;
  const auto new_id = [&]() {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "S%05zu", next_site++);
    return std::string(buf);
  };

  for (std::size_t i = 0; i < spec.tower_count; ++i) {
    Tower t;
    t.site_id = new_id();
    t.location = sample_in_polygon(spec.boundary, rng, bb.min_lon, bb.max_lon, bb.min_lat,
                                   bb.max_lat);
    t.as_dms = rng.uniform() < spec.dms_fraction;
    towers.push_back(t);
  }
  // Near-duplicate twins within the merge radius.
  const auto twin_count = static_cast<std::size_t>(spec.near_duplicate_fraction *
                                                   static_cast<double>(spec.tower_count));
  for (std::size_t i = 0; i < twin_count; ++i) {
    const Tower& base = towers[rng.uniform_index(spec.tower_count)];
    Tower twin;
    twin.site_id = new_id();
    bool placed = false;
    for (const double sx : {1.0, -1.0}) {
      for (const double sy : {1.0, -1.0}) {
        const geo::GeoPoint p{base.location.lat + sy * 0.0001, base.location.lon + sx * 0.0001};
        if (geo::contains(spec.boundary, p)) {
          twin.location = p;
          placed = true;
          break;
        }
      }
      if (placed) break;
    }
    if (placed) towers.push_back(twin);
  }
  // Records without coordinates exercise the drop path.
  const auto blank_count = static_cast<std::size_t>(spec.missing_coord_fraction *
                                                    static_cast<double>(spec.tower_count));
  for (std::size_t i = 0; i < blank_count; ++i) {
    Tower t;
    t.site_id = new_id();
    t.has_coords = false;
    towers.push_back(t);
  }
  // A mislabeled in-city tower and a correctly labeled out-of-city one: only
  // the coordinates should decide survival.
  {
    Tower mislabeled;
    mislabeled.site_id = new_id();
    mislabeled.location = sample_in_polygon(spec.boundary, rng, bb.min_lon, bb.max_lon, bb.min_lat,
                                            bb.max_lat);
    mislabeled.city = "bolu";
    towers.push_back(mislabeled);
    Tower outside;
    outside.site_id = new_id();
    outside.location = {bb.max_lat + 0.5, bb.max_lon + 0.5};
    towers.push_back(outside);
  }

  // Eligible towers (coordinates inside the boundary) serve as homes and as
  // sources for noise/day calls.
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < towers.size(); ++i) {
    if (towers[i].has_coords && geo::contains(spec.boundary, towers[i].location)) {
      eligible.push_back(i);
    }
  }
  std::vector<double> ex(eligible.size()), ey(eligible.size());
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    ex[i] = towers[eligible[i]].location.lon;
    ey[i] = towers[eligible[i]].location.lat;
  }

  // People: home point from the blob, clipped to the blob's continent side;
  // home tower is the nearest eligible tower.
  struct Person {
    std::string id;
    std::size_t home_tower;  // index into towers
  };
  std::vector<Person> people;
  std::size_t next_person = 0;
  for (const auto& blob : spec.blobs) {
    const geo::BoundaryPolygon& side =
        geo::contains(spec.europe_side, blob.center) ? spec.europe_side : spec.asia_side;
    for (std::size_t p = 0; p < blob.person_count; ++p) {
      geo::GeoPoint home;
      for (int tries = 0;; ++tries) {
        home = {rng.normal(blob.center.lat, blob.stddev_deg),
                rng.normal(blob.center.lon, blob.stddev_deg)};
        if (geo::contains(side, home)) break;
        if (tries > 10000) throw Error("synth: cannot place person inside continent side");
      }
      double px = home.lon, py = home.lat;
      std::int32_t idx = 0;
      double d2 = 0.0;
      kernels::nearest_center(&px, &py, 1, ex.data(), ey.data(), ex.size(), &idx, &d2);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "U%06zu", next_person++);
      people.push_back({buf, eligible[static_cast<std::size_t>(idx)]});
    }
  }

  // Emit files.
  std::string tower_csv = "site_id,latitude,longitude,city,district\n";
  for (const Tower& t : towers) {
    tower_csv += t.site_id + ',';
    if (t.has_coords) {
      tower_csv += coordinate_text(t.location.lat, true, t.as_dms) + ',' +
                   coordinate_text(t.location.lon, false, t.as_dms);
    } else {
      tower_csv += ",";
    }
    tower_csv += ',' + t.city + ',' + t.district + '\n';
  }

  std::string truth_csv = "caller_id,home_site_id\n";
  for (const Person& p : people) {
    truth_csv += p.id + ',' + towers[p.home_tower].site_id + '\n';
  }

  std::string calls_csv = "caller_id,caller_group,timestamp,site_id,call_type\n";
  civiltime::CivilDateTime day = *period_start;
  const double day_mean = spec.calls_per_person_night * spec.day_call_multiplier;
  for (int d = 0; d < spec.period_days; ++d) {
    const civiltime::CivilDateTime next = civiltime::next_day(day);
    for (const Person& person : people) {
      // Night calls: 23:00 on `day` through 08:00 on the next date.
      const std::uint64_t n_night = rng.poisson(spec.calls_per_person_night);
      for (std::uint64_t c = 0; c < n_night; ++c) {
        const std::size_t tower = (spec.noise > 0.0 && rng.uniform() < spec.noise)
                                      ? eligible[rng.uniform_index(eligible.size())]
                                      : person.home_tower;
        const auto offset = static_cast<int>(rng.uniform_index(9 * 3600));
        civiltime::CivilDateTime ts = offset < 3600 ? day : next;
        const int sod = offset < 3600 ? 23 * 3600 + offset : offset - 3600;
        ts.hour = sod / 3600;
        ts.minute = (sod / 60) % 60;
        ts.second = sod % 60;
        calls_csv += person.id + ",refugee," + civiltime::format_datetime(ts) + ',' +
                     towers[tower].site_id + ',' + (rng.uniform() < 0.5 ? "inbound" : "outbound") +
                     '\n';
      }
      // Day calls: a mobility mixture of home and elsewhere, 08:00-23:00.
      const std::uint64_t n_day = rng.poisson(day_mean);
      for (std::uint64_t c = 0; c < n_day; ++c) {
        const std::size_t tower = rng.uniform() < 0.4
                                      ? person.home_tower
                                      : eligible[rng.uniform_index(eligible.size())];
        const int sod = 8 * 3600 + static_cast<int>(rng.uniform_index(15 * 3600));
        civiltime::CivilDateTime ts = day;
        ts.hour = sod / 3600;
        ts.minute = (sod / 60) % 60;
        ts.second = sod % 60;
        calls_csv += person.id + ",refugee," + civiltime::format_datetime(ts) + ',' +
                     towers[tower].site_id + ',' + (rng.uniform() < 0.5 ? "inbound" : "outbound") +
                     '\n';
      }
    }
    day = next;
  }
  // A sprinkling of non-refugee rows that the join must filter out.
  const std::size_t decoys = std::max<std::size_t>(1, people.size() / 50);
  civiltime::CivilDateTime decoy_day = *period_start;
  for (std::size_t i = 0; i < decoys; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "N%06zu", i);
    const std::size_t tower = eligible[rng.uniform_index(eligible.size())];
    civiltime::CivilDateTime ts = decoy_day;
    ts.hour = static_cast<int>(rng.uniform_index(24));
    ts.minute = static_cast<int>(rng.uniform_index(60));
    ts.second = static_cast<int>(rng.uniform_index(60));
    calls_csv += std::string(buf) + ",non-refugee," + civiltime::format_datetime(ts) + ',' +
                 towers[tower].site_id + ',' + (rng.uniform() < 0.5 ? "inbound" : "outbound") +
                 '\n';
  }

  std::string facilities_csv = "facility_id,latitude,longitude\n";
  for (std::size_t i = 0; i < spec.current_facility_count; ++i) {
    const geo::GeoPoint p =
        sample_in_polygon(spec.boundary, rng, bb.min_lon, bb.max_lon, bb.min_lat, bb.max_lat);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "F%03zu", i);
    facilities_csv += std::string(buf) + ',' + csvio::format_double(p.lat) + ',' +
                      csvio::format_double(p.lon) + '\n';
  }

  const auto polygon_geojson = [](const geo::BoundaryPolygon& poly) {
    std::string coords;
    for (std::size_t r = 0; r < poly.rings.size(); ++r) {
      if (r != 0) coords += ',';
      coords += '[';
      for (std::size_t i = 0; i < poly.rings[r].size(); ++i) {
        if (i != 0) coords += ',';
        coords += '[' + csvio::format_double(poly.rings[r][i].lon) + ',' +
                  csvio::format_double(poly.rings[r][i].lat) + ']';
      }
      coords += ']';
    }
    return std::string(
               "{\"type\":\"FeatureCollection\",\"features\":[{\"type\":\"Feature\","
               "\"properties\":{\"name\":\"") +
           poly.name + "\"},\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[" + coords +
           "]}}]}\n";
  };

  GeneratedPaths paths;
  paths.towers = out_dir + "/towers.csv";
  paths.calls = out_dir + "/calls.csv";
  paths.ground_truth = out_dir + "/ground_truth.csv";
  paths.boundary = out_dir + "/boundary.geojson";
  paths.europe_side = out_dir + "/europe_side.geojson";
  paths.asia_side = out_dir + "/asia_side.geojson";
  paths.current_facilities = out_dir + "/current_facilities.csv";
  csvio::write_file(paths.towers, tower_csv);
  csvio::write_file(paths.calls, calls_csv);
  csvio::write_file(paths.ground_truth, truth_csv);
  csvio::write_file(paths.boundary, polygon_geojson(spec.boundary));
  csvio::write_file(paths.europe_side, polygon_geojson(spec.europe_side));
  csvio::write_file(paths.asia_side, polygon_geojson(spec.asia_side));
  csvio::write_file(paths.current_facilities, facilities_csv);
  return paths;
}

std::map<std::string, std::string> load_ground_truth(const std::string& path) {
  const auto lines = csvio::read_lines(path);
  if (lines.empty() || lines[0] != "caller_id,home_site_id") {
    throw IoError(path + ": expected ground truth header");
  }
  std::map<std::string, std::string> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = csvio::split(lines[i]);
    if (fields.size() != 2) throw IoError(path + ": malformed line " + std::to_string(i + 1));
    out.emplace(fields[0], fields[1]);
  }
  return out;
}

}  // namespace accessopt::synth
