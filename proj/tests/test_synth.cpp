#include <doctest.h>

#include <filesystem>

#include "accessopt/csvio.hpp"
#include "accessopt/errors.hpp"
#include "accessopt/ingest.hpp"
#include "accessopt/residence.hpp"
#include "accessopt/synth.hpp"

using namespace accessopt;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

synth::ScenarioSpec small_scenario(std::uint64_t seed, double noise) {
  synth::ScenarioSpec spec = synth::default_scenario(seed);
  spec.tower_count = 80;
  spec.blobs = {{{41.02, 28.78}, 0.03, 300}, {{41.00, 29.15}, 0.03, 150}};
  spec.noise = noise;
  spec.period_days = 3;
  spec.calls_per_person_night = 2.0;
  return spec;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("generated files parse cleanly and recover homes when noiseless") {
    const auto dir = temp_dir("accessopt_synth_noiseless");
    const auto spec = small_scenario(7, 0.0);
    const auto paths = synth::generate(spec, dir.string());

    const auto parsed = ingest::parse_towers(paths.towers);
    CHECK(parsed.errors.entries.empty());

    ingest::IngestConfig cfg;
    cfg.boundary = spec.boundary;
    cfg.europe_side = spec.europe_side;
    cfg.asia_side = spec.asia_side;
    const auto cleaned = ingest::clean_towers(parsed.records, cfg);
    CHECK(cleaned.stats.dropped_no_coordinates > 0);
    CHECK(cleaned.stats.dropped_outside_boundary == 1);
    CHECK(cleaned.stats.merged_groups > 0);  // planted near-duplicates merged

    const auto calls = ingest::parse_calls(paths.calls, cleaned.towers);
    CHECK(calls.errors.entries.empty());
    CHECK(calls.stats.dropped_non_refugee > 0);
    CHECK(calls.stats.kept > 0);

    const auto night = residence::night_filter(calls.records, {});
    const auto table = residence::residence_distribution(night);
    const auto truth = synth::load_ground_truth(paths.ground_truth);
    const auto towermap = ingest::site_to_tower(cleaned.towers);

    // Noiseless: every covered subscriber's single residence tower is the
    // merged form of the ground-truth home site.
    for (const auto& [subscriber, probs] : table.subscriber_probs) {
      REQUIRE(probs.size() == 1);
      CHECK(probs.begin()->second == doctest::Approx(1.0));
      CHECK(probs.begin()->first == towermap.at(truth.at(subscriber)));
    }
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("fixed seed reproduces byte-identical files") {
    const auto dir_a = temp_dir("accessopt_synth_a");
    const auto dir_b = temp_dir("accessopt_synth_b");
    const auto spec = small_scenario(21, 0.2);
    const auto pa = synth::generate(spec, dir_a.string());
    const auto pb = synth::generate(spec, dir_b.string());
    CHECK(csvio::read_file(pa.towers) == csvio::read_file(pb.towers));
    CHECK(csvio::read_file(pa.calls) == csvio::read_file(pb.calls));
    CHECK(csvio::read_file(pa.ground_truth) == csvio::read_file(pb.ground_truth));
    CHECK(csvio::read_file(pa.current_facilities) == csvio::read_file(pb.current_facilities));

    // A different seed produces different data.
    auto other = spec;
    other.seed = 22;
    const auto pc = synth::generate(other, dir_a.string());
    CHECK(csvio::read_file(pc.calls) != csvio::read_file(pb.calls));
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
  }

  TEST_CASE("blob centers outside the boundary are rejected") {
    auto spec = small_scenario(3, 0.1);
    spec.blobs.push_back({{55.0, 10.0}, 0.02, 10});
    const auto dir = temp_dir("accessopt_synth_bad");
    CHECK_THROWS_AS(synth::generate(spec, dir.string()), ValidationError);
    std::filesystem::remove_all(dir);
  }
}
