#include "accessopt/geodata.hpp"

#include <fstream>

#include "accessopt/csvio.hpp"
#include "accessopt/errors.hpp"

namespace accessopt::geodata {

namespace {

using nlohmann::ordered_json;

ordered_json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": invalid JSON: " + e.what());
  }
}

geo::Ring parse_ring(const ordered_json& coords, const std::string& path) {
  geo::Ring ring;
  for (const auto& pair : coords) {
    if (!pair.is_array() || pair.size() < 2) throw IoError(path + ": malformed ring coordinate");
    ring.push_back({pair[1].get<double>(), pair[0].get<double>()});
  }
  return ring;
}

ordered_json ring_coords(const geo::Ring& ring) {
  ordered_json out = ordered_json::array();
  for (const auto& p : ring) out.push_back({p.lon, p.lat});
  return out;
}

}  // namespace

geo::BoundaryPolygon load_boundary(const std::string& path) {
  const ordered_json doc = parse_file(path);
  if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features")) {
    throw IoError(path + ": expected a GeoJSON FeatureCollection");
  }
  for (const auto& feature : doc["features"]) {
    if (!feature.contains("geometry")) continue;
    const auto& geom = feature["geometry"];
    const std::string type = geom.value("type", "");
    geo::BoundaryPolygon poly;
    if (feature.contains("properties") && feature["properties"].is_object()) {
      poly.name = feature["properties"].value("name", "");
    }
    if (type == "Polygon") {
      for (const auto& ring : geom["coordinates"]) poly.rings.push_back(parse_ring(ring, path));
    } else if (type == "MultiPolygon") {
      for (const auto& polygon : geom["coordinates"]) {
        for (const auto& ring : polygon) poly.rings.push_back(parse_ring(ring, path));
      }
    } else {
      continue;
    }
    geo::validate_polygon(poly);
    return poly;
  }
  throw IoError(path + ": no polygon feature found");
}

void write_points(const std::string& path, const std::vector<PointFeature>& features) {
  ordered_json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = ordered_json::array();
  for (const auto& f : features) {
    ordered_json feature;
    feature["type"] = "Feature";
    feature["properties"] = f.properties;
    feature["geometry"] = {{"type", "Point"}, {"coordinates", {f.point.lon, f.point.lat}}};
    doc["features"].push_back(std::move(feature));
  }
  csvio::write_file(path, doc.dump(2) + "\n");
}

void write_polygons(const std::string& path, const std::vector<PolygonFeature>& features) {
  ordered_json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = ordered_json::array();
  for (const auto& f : features) {
    ordered_json feature;
    feature["type"] = "Feature";
    feature["properties"] = f.properties;
    feature["geometry"] = {{"type", "Polygon"},
                           {"coordinates", ordered_json::array({ring_coords(f.ring)})}};
    doc["features"].push_back(std::move(feature));
  }
  csvio::write_file(path, doc.dump(2) + "\n");
}

std::size_t validate_feature_collection(const std::string& path,
                                        const std::vector<std::string>& required_properties) {
  const ordered_json doc = parse_file(path);
  if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw IoError(path + ": expected a GeoJSON FeatureCollection");
  }
  for (const auto& feature : doc["features"]) {
    if (feature.value("type", "") != "Feature" || !feature.contains("geometry")) {
      throw IoError(path + ": malformed feature");
    }
    const auto& props = feature.contains("properties") ? feature["properties"] : ordered_json();
    for (const auto& key : required_properties) {
      if (!props.contains(key)) throw IoError(path + ": feature missing property '" + key + "'");
    }
    const auto& geom = feature["geometry"];
    const std::string type = geom.value("type", "");
    if (type == "Point") {
      if (!geom.contains("coordinates") || geom["coordinates"].size() < 2) {
        throw IoError(path + ": malformed point");
      }
    } else if (type == "Polygon") {
      for (const auto& ring_json : geom["coordinates"]) {
        const geo::Ring ring = parse_ring(ring_json, path);
        if (ring.size() < 4 || !(ring.front() == ring.back())) {
          throw IoError(path + ": polygon ring not closed");
        }
      }
    } else {
      throw IoError(path + ": unsupported geometry type '" + type + "'");
    }
  }
  return doc["features"].size();
}

}  // namespace accessopt::geodata
