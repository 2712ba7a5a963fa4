#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "accessopt/geo.hpp"

namespace accessopt::geodata {

using Properties = nlohmann::ordered_json;

// Loads the first named Polygon/MultiPolygon feature of a GeoJSON
// FeatureCollection (all rings, even-odd semantics). Throws IoError /
// ValidationError.
geo::BoundaryPolygon load_boundary(const std::string& path);

struct PointFeature {
  geo::GeoPoint point;
  Properties properties;
};

struct PolygonFeature {
  geo::Ring ring;
  Properties properties;
};

void write_points(const std::string& path, const std::vector<PointFeature>& features);
void write_polygons(const std::string& path, const std::vector<PolygonFeature>& features);

// Schema check used by tests and the pipeline: the file parses as a
// FeatureCollection, rings are closed, and every feature carries the
// required property keys. Returns the feature count.
std::size_t validate_feature_collection(const std::string& path,
                                        const std::vector<std::string>& required_properties);

}  // namespace accessopt::geodata
