#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "accessopt/csvio.hpp"
#include "accessopt/errors.hpp"
#include "accessopt/ingest.hpp"

using namespace accessopt;
using ingest::IngestConfig;
using ingest::RawTowerRecord;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

IngestConfig test_config() {
  IngestConfig cfg;
  cfg.boundary = {"city", {{{0, 0}, {0, 10}, {10, 10}, {10, 0}, {0, 0}}}};
  cfg.europe_side = {"europe", {{{0, 0}, {0, 5}, {10, 5}, {10, 0}, {0, 0}}}};
  cfg.asia_side = {"asia", {{{0, 5}, {0, 10}, {10, 10}, {10, 5}, {0, 5}}}};
  return cfg;
}

RawTowerRecord tower(const std::string& id, double lat, double lon) {
  return {id, geo::GeoPoint{lat, lon}, "", ""};
}

}  // namespace

TEST_SUITE("ingest") {
  TEST_CASE("parse_towers handles decimal, DMS, blank and malformed lines") {
    const std::string path = temp_path("accessopt_towers_test.csv");
    csvio::write_file(path,
                      "site_id,latitude,longitude,city,district\n"
                      "S1,41.0082,28.9784,istanbul,fatih\n"
                      "S2,41:0:29.52:N,28:58:42.24:E,istanbul,\n"
                      "S3,,,bolu,\n"
                      "S4,not-a-number,28.0,istanbul,\n");
    const auto parsed = ingest::parse_towers(path);
    REQUIRE(parsed.records.size() == 3);
    CHECK(parsed.records[0].location->lat == doctest::Approx(41.0082));
    CHECK(parsed.records[1].location->lat == doctest::Approx(41.0082).epsilon(1e-9));
    CHECK(parsed.records[1].location->lon == doctest::Approx(28.9784).epsilon(1e-9));
    CHECK_FALSE(parsed.records[2].location.has_value());
    REQUIRE(parsed.errors.entries.size() == 1);
    CHECK(parsed.errors.entries[0].line == 5);

    // Strict mode aborts on the malformed line instead.
    CHECK_THROWS_AS(ingest::parse_towers(path, true), IoError);
    std::filesystem::remove(path);
  }

  TEST_CASE("parse_towers rejects duplicate site ids") {
    const std::string path = temp_path("accessopt_towers_dup.csv");
    csvio::write_file(path,
                      "site_id,latitude,longitude,city,district\n"
                      "S1,1.0,1.0,,\n"
                      "S1,2.0,2.0,,\n");
    const auto parsed = ingest::parse_towers(path);
    CHECK(parsed.records.size() == 1);
    CHECK(parsed.errors.entries.size() == 1);
    std::filesystem::remove(path);
  }

  TEST_CASE("clean_towers merges identical coordinates") {
    auto cfg = test_config();
    const auto result =
        ingest::clean_towers({tower("S2", 2.0, 2.0), tower("S1", 2.0, 2.0)}, cfg);
    REQUIRE(result.towers.size() == 1);
    CHECK(result.towers[0].tower_id == "S1");
    CHECK(result.towers[0].merged_site_ids == std::vector<std::string>{"S1", "S2"});
    CHECK(result.towers[0].location.lat == doctest::Approx(2.0));
  }

  TEST_CASE("clean_towers keeps towers beyond the merge radius apart") {
    auto cfg = test_config();
    const auto result =
        ingest::clean_towers({tower("A", 2.0, 2.0), tower("B", 2.0, 2.01)}, cfg);
    CHECK(result.towers.size() == 2);
  }

  TEST_CASE("clean_towers merges within epsilon") {
    auto cfg = test_config();
    const auto result =
        ingest::clean_towers({tower("A", 2.0, 2.0), tower("B", 2.0001, 2.0001)}, cfg);
    REQUIRE(result.towers.size() == 1);
    CHECK(result.towers[0].merged_site_ids.size() == 2);
  }

  TEST_CASE("declared city is ignored; coordinates decide") {
    auto cfg = test_config();
    RawTowerRecord mislabeled = tower("IN", 3.0, 3.0);
    mislabeled.declared_city = "bolu";  // wrong label, inside coordinates
    RawTowerRecord outside = tower("OUT", 50.0, 50.0);
    outside.declared_city = "istanbul";  // right label, outside coordinates
    const auto result = ingest::clean_towers({mislabeled, outside}, cfg);
    REQUIRE(result.towers.size() == 1);
    CHECK(result.towers[0].tower_id == "IN");
    CHECK(result.stats.dropped_outside_boundary == 1);
  }

  TEST_CASE("clean_towers drops coordinate-less records and assigns partitions") {
    auto cfg = test_config();
    RawTowerRecord blank{"NOLOC", std::nullopt, "istanbul", ""};
    const auto result =
        ingest::clean_towers({tower("EU", 3.0, 3.0), tower("AS", 3.0, 7.0), blank}, cfg);
    REQUIRE(result.towers.size() == 2);
    CHECK(result.stats.dropped_no_coordinates == 1);
    CHECK(result.towers[0].partition == ingest::Partition::Asia);  // AS sorts first
    CHECK(result.towers[1].partition == ingest::Partition::Europe);
  }

  TEST_CASE("clean_towers with zero survivors is fatal") {
    auto cfg = test_config();
    CHECK_THROWS_AS(ingest::clean_towers({tower("X", 50.0, 50.0)}, cfg), Error);
  }

  TEST_CASE("clean_towers merge map conserves retained site ids") {
    auto cfg = test_config();
    std::vector<RawTowerRecord> raw;
    for (int i = 0; i < 40; ++i) {
      raw.push_back(tower("S" + std::to_string(i), 1.0 + 0.1 * (i % 7), 1.0 + 0.07 * (i % 11)));
    }
    const auto result = ingest::clean_towers(raw, cfg);
    std::set<std::string> seen;
    std::size_t total = 0;
    for (const auto& t : result.towers) {
      for (const auto& sid : t.merged_site_ids) {
        CHECK(seen.insert(sid).second);  // no duplication across groups
        ++total;
      }
    }
    CHECK(total == raw.size());  // no loss
  }

  TEST_CASE("clean_towers singleton separation property") {
    auto cfg = test_config();
    std::vector<RawTowerRecord> raw;
    for (int i = 0; i < 30; ++i) {
      raw.push_back(tower("S" + std::to_string(i), 1.0 + 0.3 * (i / 6), 1.0 + 0.3 * (i % 6)));
    }
    const auto result = ingest::clean_towers(raw, cfg);
    for (std::size_t a = 0; a < result.towers.size(); ++a) {
      for (std::size_t b = a + 1; b < result.towers.size(); ++b) {
        if (result.towers[a].merged_site_ids.size() == 1 &&
            result.towers[b].merged_site_ids.size() == 1) {
          const double dx = result.towers[a].location.lon - result.towers[b].location.lon;
          const double dy = result.towers[a].location.lat - result.towers[b].location.lat;
          CHECK(std::sqrt(dx * dx + dy * dy) > cfg.dbscan_epsilon);
        }
      }
    }
  }

  TEST_CASE("clean_towers is deterministic") {
    auto cfg = test_config();
    std::vector<RawTowerRecord> raw;
    for (int i = 0; i < 25; ++i) {
      raw.push_back(tower("S" + std::to_string(i), 1.0 + 0.11 * (i % 5), 2.0 + 0.13 * (i % 7)));
    }
    const auto a = ingest::clean_towers(raw, cfg);
    std::reverse(raw.begin(), raw.end());
    const auto b = ingest::clean_towers(raw, cfg);
    REQUIRE(a.towers.size() == b.towers.size());
    for (std::size_t i = 0; i < a.towers.size(); ++i) {
      CHECK(a.towers[i].tower_id == b.towers[i].tower_id);
      CHECK(a.towers[i].location.lat == b.towers[i].location.lat);
      CHECK(a.towers[i].location.lon == b.towers[i].location.lon);
    }
  }

  TEST_CASE("parse_calls inner join, refugee filter and referential integrity") {
    auto cfg = test_config();
    const auto cleaned = ingest::clean_towers(
        {tower("S1", 2.0, 2.0), tower("S2", 2.0001, 2.0001), tower("S3", 4.0, 4.0)}, cfg);
    REQUIRE(cleaned.towers.size() == 2);  // S1+S2 merged

    const std::string path = temp_path("accessopt_calls_test.csv");
    csvio::write_file(path,
                      "caller_id,caller_group,timestamp,site_id,call_type\n"
                      "U1,refugee,2018-12-03 23:30:00,S2,outbound\n"   // joins through merge map
                      "U1,refugee,2018-12-03 22:00:00,S3,inbound\n"
                      "U2,non-refugee,2018-12-03 10:00:00,S1,outbound\n"  // filtered
                      "U3,refugee,2018-12-03 10:00:00,SX,outbound\n"      // unresolved
                      "U4,refugee,2018-13-99 10:00:00,S1,outbound\n");    // bad timestamp
    const auto calls = ingest::parse_calls(path, cleaned.towers);
    REQUIRE(calls.records.size() == 2);
    CHECK(calls.records[0].tower_id == "S1");  // canonical id of the merged group
    CHECK(calls.stats.dropped_non_refugee == 1);
    CHECK(calls.stats.dropped_unresolved_site == 1);
    CHECK(calls.stats.dropped_malformed == 1);
    CHECK(calls.errors.entries.size() == 1);

    const auto towermap = ingest::site_to_tower(cleaned.towers);
    for (const auto& c : calls.records) {
      bool found = false;
      for (const auto& t : cleaned.towers) found |= t.tower_id == c.tower_id;
      CHECK(found);
    }
    CHECK(towermap.at("S2") == "S1");
    std::filesystem::remove(path);
  }
}
