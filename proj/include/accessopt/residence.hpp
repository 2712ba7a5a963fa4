#pragma once

#include <map>
#include <string>
#include <vector>

#include "accessopt/civiltime.hpp"
#include "accessopt/ingest.hpp"

namespace accessopt::residence {

// Wrapping night window, start inclusive, end exclusive.
struct ResidenceConfig {
  civiltime::CivilTime night_start{23, 0, 0};
  civiltime::CivilTime night_end{8, 0, 0};
};

bool in_night_window(const civiltime::CivilTime& t, const ResidenceConfig& cfg);

std::vector<ingest::CallRecord> night_filter(const std::vector<ingest::CallRecord>& calls,
                                             const ResidenceConfig& cfg);

// Per-subscriber residence probabilities and the per-tower aggregate.
struct ResidenceTable {
  // subscriber -> (tower -> probability); probabilities sum to 1 per subscriber.
  std::map<std::string, std::map<std::string, double>> subscriber_probs;
  // tower -> sum of probabilities over subscribers.
  std::map<std::string, double> expected_residents;

  std::size_t subscribers_with_night_calls() const { return subscriber_probs.size(); }
  double total_expected() const;
};

// Tower-use frequencies of night calls per subscriber, read as residence
// probabilities. Throws Error on empty input.
ResidenceTable residence_distribution(const std::vector<ingest::CallRecord>& night_calls);

// Fraction of distinct subscribers in `all_calls` that appear in the table.
double coverage_ratio(const std::vector<ingest::CallRecord>& all_calls,
                      const ResidenceTable& table);

// Most-used tower per subscriber over the full day. Ties break to the
// lexicographically smallest tower_id.
std::map<std::string, std::string> mode_location(const std::vector<ingest::CallRecord>& calls);

}  // namespace accessopt::residence
