#include <doctest.h>

#include <algorithm>

#include "accessopt/errors.hpp"
#include "accessopt/residence.hpp"
#include "accessopt/rng.hpp"

using namespace accessopt;
using ingest::CallRecord;
using residence::ResidenceConfig;

namespace {

CallRecord call(const std::string& caller, const std::string& tower, int hour, int minute = 0,
                int second = 0) {
  CallRecord c;
  c.caller_id = caller;
  c.tower_id = tower;
  c.timestamp = {2018, 12, 3, hour, minute, second};
  return c;
}

}  // namespace

TEST_SUITE("residence") {
  TEST_CASE("night window boundaries") {
    const ResidenceConfig cfg;
    CHECK(residence::in_night_window({23, 0, 0}, cfg));   // inclusive start
    CHECK_FALSE(residence::in_night_window({8, 0, 0}, cfg));  // exclusive end
    CHECK(residence::in_night_window({3, 30, 0}, cfg));   // interior of the wrap
    CHECK(residence::in_night_window({7, 59, 59}, cfg));
    CHECK_FALSE(residence::in_night_window({22, 59, 59}, cfg));
    CHECK(residence::in_night_window({0, 0, 0}, cfg));
  }

  TEST_CASE("non-wrapping window") {
    const ResidenceConfig cfg{{9, 0, 0}, {17, 0, 0}};
    CHECK(residence::in_night_window({9, 0, 0}, cfg));
    CHECK(residence::in_night_window({12, 0, 0}, cfg));
    CHECK_FALSE(residence::in_night_window({17, 0, 0}, cfg));
    CHECK_FALSE(residence::in_night_window({3, 0, 0}, cfg));
  }

  TEST_CASE("night_filter") {
    const std::vector<CallRecord> calls = {call("U1", "A", 23), call("U1", "A", 8),
                                           call("U1", "A", 3, 30)};
    const auto night = residence::night_filter(calls, {});
    REQUIRE(night.size() == 2);
  }

  TEST_CASE("residence distribution frequencies") {
    // 4 night calls: 3 at A, 1 at B -> 0.75 / 0.25.
    const std::vector<CallRecord> night = {call("U1", "A", 23), call("U1", "A", 0),
                                           call("U1", "A", 2), call("U1", "B", 5)};
    const auto table = residence::residence_distribution(night);
    CHECK(table.subscriber_probs.at("U1").at("A") == doctest::Approx(0.75));
    CHECK(table.subscriber_probs.at("U1").at("B") == doctest::Approx(0.25));
    CHECK(table.expected_residents.at("A") == doctest::Approx(0.75));
  }

  TEST_CASE("single-tower subscriber contributes one full resident") {
    const std::vector<CallRecord> night = {call("U1", "A", 23), call("U1", "A", 1)};
    const auto table = residence::residence_distribution(night);
    CHECK(table.expected_residents.at("A") == doctest::Approx(1.0));
  }

  TEST_CASE("two subscribers split 50/50 over two towers") {
    const std::vector<CallRecord> night = {call("U1", "A", 23), call("U1", "B", 1),
                                           call("U2", "A", 2),  call("U2", "B", 3)};
    const auto table = residence::residence_distribution(night);
    CHECK(table.expected_residents.at("A") == doctest::Approx(1.0));
    CHECK(table.expected_residents.at("B") == doctest::Approx(1.0));
  }

  TEST_CASE("empty input is fatal") {
    CHECK_THROWS_AS(residence::residence_distribution({}), Error);
  }

  TEST_CASE("probability normalization and mass conservation properties") {
    Rng rng(17);
    std::vector<CallRecord> night;
    const int subscribers = 200;
    for (int s = 0; s < subscribers; ++s) {
      const int ncalls = 1 + static_cast<int>(rng.uniform_index(10));
      for (int c = 0; c < ncalls; ++c) {
        night.push_back(call("U" + std::to_string(s),
                             "T" + std::to_string(rng.uniform_index(20)),
                             static_cast<int>(rng.uniform_index(8))));
      }
    }
    const auto table = residence::residence_distribution(night);
    for (const auto& [subscriber, probs] : table.subscriber_probs) {
      double sum = 0.0;
      for (const auto& [tower, p] : probs) sum += p;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(table.total_expected() ==
          doctest::Approx(static_cast<double>(subscribers)).epsilon(1e-6));
    CHECK(table.subscribers_with_night_calls() == subscribers);
  }

  TEST_CASE("adding a night call at a tower never lowers its probability") {
    Rng rng(23);
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<CallRecord> night;
      const int ncalls = 1 + static_cast<int>(rng.uniform_index(8));
      for (int c = 0; c < ncalls; ++c) {
        night.push_back(call("U", "T" + std::to_string(rng.uniform_index(4)), 23));
      }
      const auto before = residence::residence_distribution(night);
      const std::string target = "T" + std::to_string(rng.uniform_index(4));
      night.push_back(call("U", target, 1));
      const auto after = residence::residence_distribution(night);
      const auto& bp = before.subscriber_probs.at("U");
      const double pb = bp.count(target) ? bp.at(target) : 0.0;
      CHECK(after.subscriber_probs.at("U").at(target) >= pb - 1e-12);
    }
  }

  TEST_CASE("coverage ratio counts subscribers without night calls") {
    std::vector<CallRecord> all = {call("U1", "A", 23), call("U2", "A", 12)};
    const auto night = residence::night_filter(all, {});
    const auto table = residence::residence_distribution(night);
    CHECK(residence::coverage_ratio(all, table) == doctest::Approx(0.5));
  }

  TEST_CASE("mode location picks the busiest tower with lexicographic ties") {
    std::vector<CallRecord> calls;
    for (int i = 0; i < 5; ++i) calls.push_back(call("U1", "A", 10));
    for (int i = 0; i < 2; ++i) calls.push_back(call("U1", "B", 11));
    for (int i = 0; i < 3; ++i) calls.push_back(call("U2", "B", 12));
    for (int i = 0; i < 3; ++i) calls.push_back(call("U2", "A", 13));
    calls.push_back(call("U3", "C", 14));
    const auto modes = residence::mode_location(calls);
    CHECK(modes.at("U1") == "A");  // strict mode
    CHECK(modes.at("U2") == "A");  // tie: lexicographically smallest
    CHECK(modes.at("U3") == "C");  // single call

    // Invariant under reordering.
    std::reverse(calls.begin(), calls.end());
    CHECK(residence::mode_location(calls) == modes);
  }
}
