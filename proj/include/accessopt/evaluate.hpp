#pragma once

#include <string>
#include <vector>

#include "accessopt/costs.hpp"
#include "accessopt/geo.hpp"

namespace accessopt::evaluate {

// One placement scenario: a label plus the set of open region indices.
struct Scenario {
  std::string label;
  std::vector<std::size_t> open_set;
};

struct ScenarioRow {
  std::string label;
  // Nearest facility picked independently per cost kind.
  double avg_distance_km = 0.0;
  double avg_duration_min = 0.0;
  // Supplementary joint columns: the other cost measured at the facility
  // that is nearest under the primary kind.
  double duration_at_distance_nearest_min = 0.0;
  double distance_at_duration_nearest_km = 0.0;
};

struct AccessReport {
  std::vector<ScenarioRow> rows;
  double total_weight = 0.0;
};

// Per-person average travel distance and duration to the nearest open
// facility, weighted by region demand. Throws ValidationError on dimension
// mismatches or empty scenario sets.
AccessReport access_report(const std::vector<double>& weights,
                           const std::vector<Scenario>& scenarios, const costs::CostMatrix& D,
                           const costs::CostMatrix& T);

// Maps real facility pins to the regions with the nearest centers (Euclidean
// on lon/lat). Duplicates collapse; pins outside the boundary get a warning
// on stderr but map to the nearest region anyway.
std::vector<std::size_t> map_current_facilities(const std::vector<geo::GeoPoint>& pins,
                                                const std::vector<geo::GeoPoint>& region_centers,
                                                const geo::BoundaryPolygon* boundary = nullptr);

// Fixed-width table with km to one decimal and minutes to the nearest
// integer. Full precision goes to render_csv.
std::string render_text(const AccessReport& report);
std::string render_csv(const AccessReport& report);

}  // namespace accessopt::evaluate
