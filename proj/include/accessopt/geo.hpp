#pragma once

#include <string>
#include <vector>

namespace accessopt::geo {

// Decimal-degree coordinate. lat in [-90, 90], lon in [-180, 180].
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

// Throws ValidationError on non-finite or out-of-range fields.
void validate_point(const GeoPoint& p);

// Degree/minute/second coordinate as found in raw tower lookup tables.
// degrees is non-negative; the sign is carried by the hemisphere letter.
struct DmsCoordinate {
  int degrees = 0;
  int minutes = 0;
  double seconds = 0.0;
  char hemisphere = 'N';  // one of N, S, E, W
};

// sign(hemisphere) * (degrees + minutes/60 + seconds/3600).
double dms_to_decimal(const DmsCoordinate& c);

// Inverse of dms_to_decimal up to floating-point rounding.
DmsCoordinate decimal_to_dms(double degrees, bool is_latitude);

// Great-circle distance in meters, mean Earth radius 6,371,000 m.
double haversine_m(const GeoPoint& a, const GeoPoint& b);

// Closed ring: front() == back(), at least 4 entries.
using Ring = std::vector<GeoPoint>;

// Named polygon. Multiple rings combine with even-odd semantics.
struct BoundaryPolygon {
  std::string name;
  std::vector<Ring> rings;
};

// Ring closure, minimum size and self-intersection checks. Throws ValidationError.
void validate_polygon(const BoundaryPolygon& poly);

// Even-odd ray casting on the (lon, lat) plane. Points on an edge count as
// inside. Throws ValidationError for degenerate rings.
bool contains(const BoundaryPolygon& poly, const GeoPoint& p);
bool ring_contains(const Ring& ring, const GeoPoint& p);

// Planar shoelace area on the (lon, lat) plane, in square degrees.
double ring_area(const Ring& ring);
double area(const BoundaryPolygon& poly);

struct VoronoiDiagram {
  std::vector<GeoPoint> sites;
  std::vector<Ring> cells;  // one closed ring per site, clipped to the boundary
};

// Voronoi cells of the sites under the Euclidean metric on the (lon, lat)
// plane, clipped to a single-ring boundary polygon. Sites must be pairwise
// distinct and inside the clip polygon.
VoronoiDiagram voronoi(const std::vector<GeoPoint>& sites, const BoundaryPolygon& clip);

}  // namespace accessopt::geo
