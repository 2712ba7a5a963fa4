#include "accessopt/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "accessopt/errors.hpp"

namespace accessopt::geo {

namespace {

constexpr double kEarthRadiusM = 6371000.0;
constexpr double kOnEdgeEps = 1e-12;

double deg2rad(double d) { return d * M_PI / 180.0; }

// 2D point on the lon/lat plane: x = lon, y = lat.
struct P2 {
  double x = 0.0;
  double y = 0.0;
};

double cross(const P2& o, const P2& a, const P2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(const P2& a, const P2& b, const P2& p) {
  const double c = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
  if (std::fabs(c) > kOnEdgeEps) return false;
  return p.x >= std::min(a.x, b.x) - kOnEdgeEps && p.x <= std::max(a.x, b.x) + kOnEdgeEps &&
         p.y >= std::min(a.y, b.y) - kOnEdgeEps && p.y <= std::max(a.y, b.y) + kOnEdgeEps;
}

P2 to_p2(const GeoPoint& g) { return {g.lon, g.lat}; }
GeoPoint to_geo(const P2& p) { return {p.y, p.x}; }

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

// Proper crossing of open segments (shared endpoints do not count).
bool segments_properly_intersect(const P2& a, const P2& b, const P2& c, const P2& d) {
  const int d1 = sgn(cross(a, b, c));
  const int d2 = sgn(cross(a, b, d));
  const int d3 = sgn(cross(c, d, a));
  const int d4 = sgn(cross(c, d, b));
  return d1 * d2 < 0 && d3 * d4 < 0;
}

void validate_ring(const Ring& ring) {
  if (ring.size() < 4) throw ValidationError("polygon ring needs at least 4 points");
  if (!(ring.front() == ring.back())) throw ValidationError("polygon ring is not closed");
  const std::size_t n = ring.size() - 1;  // distinct vertices
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Skip adjacent edges (they share an endpoint).
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_properly_intersect(to_p2(ring[i]), to_p2(ring[i + 1]), to_p2(ring[j]),
                                      to_p2(ring[j + 1]))) {
        throw ValidationError("polygon ring is self-intersecting");
      }
    }
  }
}

bool ring_crossings_odd(const Ring& ring, const P2& p) {
  bool inside = false;
  const std::size_t n = ring.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const P2 a = to_p2(ring[i]);
    const P2 b = to_p2(ring[i + 1]);
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xcross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < xcross) inside = !inside;
    }
  }
  return inside;
}

double ring_signed_area(const Ring& ring) {
  double acc = 0.0;
  const std::size_t n = ring.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    acc += ring[i].lon * ring[i + 1].lat - ring[i + 1].lon * ring[i].lat;
  }
  return 0.5 * acc;
}

// Clips a polygon (open vertex list) to the half-plane dot(p - mid, dir) <= 0.
std::vector<P2> clip_halfplane(const std::vector<P2>& poly, const P2& mid, const P2& dir) {
  std::vector<P2> out;
  out.reserve(poly.size() + 2);
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const P2& a = poly[i];
    const P2& b = poly[(i + 1) % n];
    const double fa = (a.x - mid.x) * dir.x + (a.y - mid.y) * dir.y;
    const double fb = (b.x - mid.x) * dir.x + (b.y - mid.y) * dir.y;
    if (fa <= 0.0) out.push_back(a);
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
      const double t = fa / (fa - fb);
      out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
  }
  return out;
}

// Sutherland-Hodgman: clip an arbitrary subject polygon against a convex
// CCW clip polygon. Both are open vertex lists.
std::vector<P2> clip_to_convex(const std::vector<P2>& subject, const std::vector<P2>& convex) {
  std::vector<P2> out = subject;
  const std::size_t n = convex.size();
  for (std::size_t i = 0; i < n && !out.empty(); ++i) {
    const P2& a = convex[i];
    const P2& b = convex[(i + 1) % n];
    // Keep the left side of edge a->b: cross(b-a, p-a) >= 0.
    std::vector<P2> next;
    next.reserve(out.size() + 2);
    const std::size_t m = out.size();
    for (std::size_t j = 0; j < m; ++j) {
      const P2& p = out[j];
      const P2& q = out[(j + 1) % m];
      const double fp = cross(a, b, p);
      const double fq = cross(a, b, q);
      if (fp >= 0.0) next.push_back(p);
      if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
        const double t = fp / (fp - fq);
        next.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
      }
    }
    out = std::move(next);
  }
  return out;
}

double max_dist2_to(const std::vector<P2>& poly, const P2& s) {
  double best = 0.0;
  for (const P2& v : poly) {
    const double dx = v.x - s.x;
    const double dy = v.y - s.y;
    best = std::max(best, dx * dx + dy * dy);
  }
  return best;
}

Ring close_ring(std::vector<P2> vertices) {
  // Normalize to CCW for consistent output orientation.
  double acc = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const P2& a = vertices[i];
    const P2& b = vertices[(i + 1) % vertices.size()];
    acc += a.x * b.y - b.x * a.y;
  }
  if (acc < 0.0) std::reverse(vertices.begin(), vertices.end());
  Ring ring;
  ring.reserve(vertices.size() + 1);
  for (const P2& v : vertices) ring.push_back(to_geo(v));
  ring.push_back(ring.front());
  return ring;
}

}  // namespace

void validate_point(const GeoPoint& p) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon)) {
    throw ValidationError("coordinate is not finite");
  }
  if (p.lat < -90.0 || p.lat > 90.0) throw ValidationError("latitude out of [-90, 90]");
  if (p.lon < -180.0 || p.lon > 180.0) throw ValidationError("longitude out of [-180, 180]");
}

double dms_to_decimal(const DmsCoordinate& c) {
  if (c.degrees < 0) throw ValidationError("DMS degrees must be non-negative");
  if (c.minutes < 0 || c.minutes >= 60) throw ValidationError("DMS minutes out of [0, 60)");
  if (!(c.seconds >= 0.0) || c.seconds >= 60.0) throw ValidationError("DMS seconds out of [0, 60)");
  double sign = 0.0;
  switch (c.hemisphere) {
    case 'N':
    case 'E':
      sign = 1.0;
      break;
    case 'S':
    case 'W':
      sign = -1.0;
      break;
    default:
      throw ValidationError("DMS hemisphere must be one of N, S, E, W");
  }
  return sign * (c.degrees + c.minutes / 60.0 + c.seconds / 3600.0);
}

DmsCoordinate decimal_to_dms(double degrees, bool is_latitude) {
  if (!std::isfinite(degrees)) throw ValidationError("coordinate is not finite");
  DmsCoordinate out;
  out.hemisphere = degrees < 0.0 ? (is_latitude ? 'S' : 'W') : (is_latitude ? 'N' : 'E');
  double a = std::fabs(degrees);
  out.degrees = static_cast<int>(a);
  double rem = (a - out.degrees) * 60.0;
  out.minutes = static_cast<int>(rem);
  out.seconds = (rem - out.minutes) * 60.0;
  // Carry rounding artifacts like 59.9999999 seconds.
  if (out.seconds >= 60.0) {
    out.seconds -= 60.0;
    out.minutes += 1;
  }
  if (out.minutes >= 60) {
    out.minutes -= 60;
    out.degrees += 1;
  }
  return out;
}

double haversine_m(const GeoPoint& a, const GeoPoint& b) {
  validate_point(a);
  validate_point(b);
  if (a == b) return 0.0;
  const double lat1 = deg2rad(a.lat);
  const double lat2 = deg2rad(b.lat);
  const double dlat = deg2rad(b.lat - a.lat);
  const double dlon = deg2rad(b.lon - a.lon);
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

void validate_polygon(const BoundaryPolygon& poly) {
  if (poly.rings.empty()) throw ValidationError("polygon has no rings");
  for (const Ring& ring : poly.rings) validate_ring(ring);
}

bool ring_contains(const Ring& ring, const GeoPoint& p) {
  if (ring.size() < 4 || !(ring.front() == ring.back())) {
    throw ValidationError("degenerate polygon ring");
  }
  const P2 q = to_p2(p);
  const std::size_t n = ring.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (on_segment(to_p2(ring[i]), to_p2(ring[i + 1]), q)) return true;
  }
  return ring_crossings_odd(ring, q);
}

bool contains(const BoundaryPolygon& poly, const GeoPoint& p) {
  if (poly.rings.empty()) throw ValidationError("polygon has no rings");
  const P2 q = to_p2(p);
  bool inside = false;
  for (const Ring& ring : poly.rings) {
    if (ring.size() < 4 || !(ring.front() == ring.back())) {
      throw ValidationError("degenerate polygon ring");
    }
    const std::size_t n = ring.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (on_segment(to_p2(ring[i]), to_p2(ring[i + 1]), q)) return true;
    }
    inside ^= ring_crossings_odd(ring, q);
  }
  return inside;
}

double ring_area(const Ring& ring) {
  if (ring.size() < 4 || !(ring.front() == ring.back())) {
    throw ValidationError("degenerate polygon ring");
  }
  return std::fabs(ring_signed_area(ring));
}

double area(const BoundaryPolygon& poly) {
  double acc = 0.0;
  for (const Ring& ring : poly.rings) acc += ring_area(ring);
  return acc;
}

VoronoiDiagram voronoi(const std::vector<GeoPoint>& sites, const BoundaryPolygon& clip) {
  if (sites.empty()) throw ValidationError("voronoi: need at least one site");
  validate_polygon(clip);
  if (clip.rings.size() != 1) {
    throw ValidationError("voronoi: clip polygon must have exactly one ring");
  }
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (!contains(clip, sites[i])) {
      throw ValidationError("voronoi: site " + std::to_string(i) + " outside clip polygon");
    }
  }

  const std::size_t n = sites.size();
  // Duplicate detection via sort on coordinates.
  {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (sites[a].lon != sites[b].lon) return sites[a].lon < sites[b].lon;
      return sites[a].lat < sites[b].lat;
    });
    for (std::size_t i = 1; i < n; ++i) {
      if (sites[order[i - 1]] == sites[order[i]]) {
        throw ValidationError("voronoi: duplicate sites (dedup upstream)");
      }
    }
  }

  // Bounding box of the clip ring, slightly inflated, as the convex seed cell.
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  for (const GeoPoint& g : clip.rings[0]) {
    min_x = std::min(min_x, g.lon);
    max_x = std::max(max_x, g.lon);
    min_y = std::min(min_y, g.lat);
    max_y = std::max(max_y, g.lat);
  }
  const double pad = std::max(max_x - min_x, max_y - min_y) * 0.01 + 1e-9;
  min_x -= pad;
  max_x += pad;
  min_y -= pad;
  max_y += pad;
  const std::vector<P2> bbox = {
      {min_x, min_y}, {max_x, min_y}, {max_x, max_y}, {min_x, max_y}};

  std::vector<P2> subject;  // clip ring as open vertex list
  for (std::size_t i = 0; i + 1 < clip.rings[0].size(); ++i) {
    subject.push_back(to_p2(clip.rings[0][i]));
  }

  VoronoiDiagram out;
  out.sites = sites;
  out.cells.resize(n);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    const P2 si = to_p2(sites[i]);
    std::vector<P2> cell = bbox;

    // Nearest competing sites first so the radius prune fires early.
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double da = (sites[a].lon - si.x) * (sites[a].lon - si.x) +
                        (sites[a].lat - si.y) * (sites[a].lat - si.y);
      const double db = (sites[b].lon - si.x) * (sites[b].lon - si.x) +
                        (sites[b].lat - si.y) * (sites[b].lat - si.y);
      if (da != db) return da < db;
      return a < b;
    });

    double max_r2 = max_dist2_to(cell, si);
    for (std::size_t j : order) {
      if (j == i) continue;
      const P2 sj = to_p2(sites[j]);
      const double dx = sj.x - si.x;
      const double dy = sj.y - si.y;
      const double d2 = dx * dx + dy * dy;
      // A bisector at distance d/2 cannot cut a cell of radius < d/2.
      if (d2 > 4.0 * max_r2) break;
      const P2 mid{si.x + dx * 0.5, si.y + dy * 0.5};
      cell = clip_halfplane(cell, mid, {dx, dy});
      if (cell.empty()) break;
      max_r2 = max_dist2_to(cell, si);
    }

    std::vector<P2> clipped = clip_to_convex(subject, cell);
    if (clipped.size() < 3) {
      throw ValidationError("voronoi: degenerate cell for site " + std::to_string(i));
    }
    out.cells[i] = close_ring(std::move(clipped));
  }
  return out;
}

}  // namespace accessopt::geo
