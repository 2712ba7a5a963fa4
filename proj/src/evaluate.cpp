#include "accessopt/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <set>

#include "accessopt/csvio.hpp"
#include "accessopt/errors.hpp"

namespace accessopt::evaluate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

AccessReport access_report(const std::vector<double>& weights,
                           const std::vector<Scenario>& scenarios, const costs::CostMatrix& D,
                           const costs::CostMatrix& T) {
  const std::size_t n = weights.size();
  if (n == 0) throw ValidationError("access_report: no regions");
  if (D.n != n || T.n != n) {
    throw ValidationError("access_report: matrix dimensions do not match region count");
  }
  if (D.kind != costs::CostKind::distance_m || T.kind != costs::CostKind::duration_s) {
    throw ValidationError("access_report: matrix kinds are swapped or wrong");
  }

  AccessReport report;
  for (double w : weights) report.total_weight += w;
  if (!(report.total_weight > 0.0)) {
    throw ValidationError("access_report: total demand weight must be positive");
  }

  for (const Scenario& scenario : scenarios) {
    if (scenario.open_set.empty()) {
      throw ValidationError("access_report: scenario '" + scenario.label + "' has no facilities");
    }
    for (std::size_t j : scenario.open_set) {
      if (j >= n) throw ValidationError("access_report: facility index out of range");
    }
    double dist_sum = 0.0, dur_sum = 0.0;
    double dur_at_dist_sum = 0.0, dist_at_dur_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best_d = kInf, best_t = kInf;
      std::size_t arg_d = scenario.open_set.front(), arg_t = arg_d;
      for (std::size_t j : scenario.open_set) {
        if (D.at(i, j) < best_d) {
          best_d = D.at(i, j);
          arg_d = j;
        }
        if (T.at(i, j) < best_t) {
          best_t = T.at(i, j);
          arg_t = j;
        }
      }
      dist_sum += weights[i] * best_d;
      dur_sum += weights[i] * best_t;
      dur_at_dist_sum += weights[i] * T.at(i, arg_d);
      dist_at_dur_sum += weights[i] * D.at(i, arg_t);
    }
    ScenarioRow row;
    row.label = scenario.label;
    row.avg_distance_km = dist_sum / report.total_weight / 1000.0;
    row.avg_duration_min = dur_sum / report.total_weight / 60.0;
    row.duration_at_distance_nearest_min = dur_at_dist_sum / report.total_weight / 60.0;
    row.distance_at_duration_nearest_km = dist_at_dur_sum / report.total_weight / 1000.0;
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<std::size_t> map_current_facilities(const std::vector<geo::GeoPoint>& pins,
                                                const std::vector<geo::GeoPoint>& region_centers,
                                                const geo::BoundaryPolygon* boundary) {
  if (region_centers.empty()) throw ValidationError("map_current_facilities: no regions");
  std::set<std::size_t> open;
  for (const geo::GeoPoint& pin : pins) {
    if (boundary != nullptr && !geo::contains(*boundary, pin)) {
      std::cerr << "warning: facility at (" << pin.lat << ", " << pin.lon
                << ") lies outside the study boundary; mapping to nearest region\n";
    }
    double best = kInf;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < region_centers.size(); ++j) {
      const double dx = pin.lon - region_centers[j].lon;
      const double dy = pin.lat - region_centers[j].lat;
      const double d2 = dx * dx + dy * dy;
      if (d2 < best) {
        best = d2;
        best_j = j;
      }
    }
    open.insert(best_j);
  }
  return {open.begin(), open.end()};
}

std::string render_text(const AccessReport& report) {
  std::size_t label_width = std::string("Locations").size();
  for (const auto& row : report.rows) label_width = std::max(label_width, row.label.size());

  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-*s  %20s  %21s\n", static_cast<int>(label_width), "Locations",
                "Travel Distance (km)", "Travel Duration (min)");
  out += buf;
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%-*s  %20.1f  %21.0f\n", static_cast<int>(label_width),
                  row.label.c_str(), row.avg_distance_km, row.avg_duration_min);
    out += buf;
  }
  return out;
}

std::string render_csv(const AccessReport& report) {
  std::string out =
      "label,avg_distance_km,avg_duration_min,duration_at_distance_nearest_min,"
      "distance_at_duration_nearest_km,total_weight\n";
  for (const auto& row : report.rows) {
    out += row.label + ',' + csvio::format_double(row.avg_distance_km) + ',' +
           csvio::format_double(row.avg_duration_min) + ',' +
           csvio::format_double(row.duration_at_distance_nearest_min) + ',' +
           csvio::format_double(row.distance_at_duration_nearest_km) + ',' +
           csvio::format_double(report.total_weight) + '\n';
  }
  return out;
}

}  // namespace accessopt::evaluate
