#include "accessopt/residence.hpp"

#include <set>

#include "accessopt/errors.hpp"

namespace accessopt::residence {

bool in_night_window(const civiltime::CivilTime& t, const ResidenceConfig& cfg) {
  const int s = cfg.night_start.seconds_of_day();
  const int e = cfg.night_end.seconds_of_day();
  const int x = t.seconds_of_day();
  if (s == e) throw ValidationError("night window start and end must differ");
  if (s < e) return x >= s && x < e;
  return x >= s || x < e;  // wraps past midnight
}

std::vector<ingest::CallRecord> night_filter(const std::vector<ingest::CallRecord>& calls,
                                             const ResidenceConfig& cfg) {
  std::vector<ingest::CallRecord> out;
  out.reserve(calls.size());
  for (const auto& c : calls) {
    if (in_night_window(c.timestamp.time(), cfg)) out.push_back(c);
  }
  return out;
}

double ResidenceTable::total_expected() const {
  double acc = 0.0;
  for (const auto& [tower, v] : expected_residents) acc += v;
  return acc;
}

ResidenceTable residence_distribution(const std::vector<ingest::CallRecord>& night_calls) {
  if (night_calls.empty()) throw Error("residence_distribution: no night calls");

  // subscriber -> tower -> count. Ordered maps keep every reduction in a
  // fixed order, so the floating-point sums are reproducible.
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& c : night_calls) counts[c.caller_id][c.tower_id] += 1;

  ResidenceTable table;
  for (const auto& [subscriber, towers] : counts) {
    std::size_t total = 0;
    for (const auto& [tower, cnt] : towers) total += cnt;
    auto& probs = table.subscriber_probs[subscriber];
    for (const auto& [tower, cnt] : towers) {
      const double p = static_cast<double>(cnt) / static_cast<double>(total);
      probs[tower] = p;
      table.expected_residents[tower] += p;
    }
  }
  return table;
}

double coverage_ratio(const std::vector<ingest::CallRecord>& all_calls,
                      const ResidenceTable& table) {
  std::set<std::string> subscribers;
  for (const auto& c : all_calls) subscribers.insert(c.caller_id);
  if (subscribers.empty()) return 0.0;
  return static_cast<double>(table.subscriber_probs.size()) /
         static_cast<double>(subscribers.size());
}

std::map<std::string, std::string> mode_location(const std::vector<ingest::CallRecord>& calls) {
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& c : calls) counts[c.caller_id][c.tower_id] += 1;

  std::map<std::string, std::string> out;
  for (const auto& [subscriber, towers] : counts) {
    std::size_t best = 0;
    const std::string* best_tower = nullptr;
    // Map iteration is id-ascending, so strict > implements the tie rule.
    for (const auto& [tower, cnt] : towers) {
      if (cnt > best) {
        best = cnt;
        best_tower = &tower;
      }
    }
    out.emplace(subscriber, *best_tower);
  }
  return out;
}

}  // namespace accessopt::residence
