#include <doctest.h>

#include <fstream>

#include "adscan/dedup.hpp"
#include "adscan/extract.hpp"
#include "adscan/report.hpp"
#include "adscan/runmeta.hpp"
#include "adscan/synth.hpp"
#include "oracles.hpp"

using namespace adscan;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

AdInstance sample_ad(const std::string& id, AdCategory cat, double lat, double lon) {
  AdInstance ad;
  ad.ad_id = id;
  ad.source_image = "img";
  ad.hull = {{0, 0}, {50, 0}, {50, 50}, {0, 50}};
  ad.component_pixels = 2500;
  ad.filled_pixels = 2601;
  ad.bbox = {0, 0, 50, 50};
  ad.lat = lat;
  ad.lon = lon;
  ad.category = cat;
  return ad;
}

ExposureTable small_table() {
  ExposureTable t;
  t.group_by = GroupBy::Decile;
  ExposureRow row;
  row.group_key = "1";
  row.image_total = 10;
  row.ad_count[0] = 2;
  row.images_with[0] = 2;
  row.pct_images[0] = 20.0;
  row.pct_ads[0] = 100.0;
  t.rows.push_back(row);
  t.total_ads[0] = 2;
  t.total_images = 10;
  return t;
}

synth::SynthSpec small_spec(std::uint64_t seed) {
  synth::SynthSpec spec;
  spec.seed = seed;
  spec.frames = 3;
  spec.frame_width = 320;
  spec.frame_height = 240;
  spec.ads = {
      {"adA", AdCategory::Food, 2500, {0, 1}, 2, std::nullopt},
      {"adB", AdCategory::Other, 3600, {2}, 0, std::nullopt},
  };
  return spec;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("geojson: one ad emits one lon-first Point feature") {
  oracles::TempDir tmp("geo1");
  std::vector<AdInstance> ads{sample_ad("a1", AdCategory::Food, 53.4, -2.98)};
  report::emit_geojson(ads, {{"a1", "E01"}}, tmp.file("ads.geojson"));
  auto back = report::parse_ads_geojson(tmp.file("ads.geojson"));
  REQUIRE(back.size() == 1);
  CHECK(back[0].ad_id == "a1");
  CHECK(back[0].category == "food");
  CHECK(back[0].area == "E01");
  CHECK(back[0].filled_pixels == 2601);
  CHECK(back[0].lat == 53.4);
  CHECK(back[0].lon == -2.98);
  // Coordinate order in the file is [lon, lat].
  std::string text = slurp(tmp.file("ads.geojson"));
  CHECK(text.find("-2.98,") < text.find("53.4"));
}

TEST_CASE("geojson: empty collection is valid and parses back empty") {
  oracles::TempDir tmp("geo2");
  report::emit_geojson({}, {}, tmp.file("empty.geojson"));
  CHECK(report::parse_ads_geojson(tmp.file("empty.geojson")).empty());
}

TEST_CASE("geojson: round-trip preserves every property") {
  oracles::TempDir tmp("geo3");
  std::vector<AdInstance> ads;
  std::map<std::string, std::string> areas;
  std::mt19937_64 rng(12);
  for (int i = 0; i < 25; ++i) {
    std::string id = "ad" + std::to_string(i);
    ads.push_back(sample_ad(id,
                            kAllCategories[static_cast<std::size_t>(
                                oracles::rng_int(rng, 0, 3))],
                            oracles::rng_real(rng, 53.3, 53.5),
                            oracles::rng_real(rng, -3.1, -2.8)));
    ads.back().filled_pixels = 2000 + i;
    areas[id] = "E" + std::to_string(i % 4);
  }
  report::emit_geojson(ads, areas, tmp.file("r.geojson"));
  auto back = report::parse_ads_geojson(tmp.file("r.geojson"));
  REQUIRE(back.size() == ads.size());
  for (std::size_t i = 0; i < ads.size(); ++i) {
    CHECK(back[i].ad_id == ads[i].ad_id);
    CHECK(back[i].category == category_name(*ads[i].category));
    CHECK(back[i].area == areas[ads[i].ad_id]);
    CHECK(back[i].filled_pixels == ads[i].filled_pixels);
    CHECK(back[i].lat == ads[i].lat);  // lossless double round-trip
    CHECK(back[i].lon == ads[i].lon);
  }
}

TEST_CASE("svg: single-group chart carries the 20.00 bar at full height") {
  std::string svg = report::render_svg_bars(small_table());
  // y_max = 20, plot height = 540 - 48 - 72 = 420: the food bar is full height.
  CHECK(svg.find("height=\"420.00\"") != std::string::npos);
  CHECK(svg.find(">20.00<") != std::string::npos);
  CHECK(svg.find("viewBox=\"0 0 960 540\"") != std::string::npos);
}

TEST_CASE("svg: all-zero table still renders axes and zero-height bars") {
  ExposureTable t;
  t.group_by = GroupBy::Supergroup;
  ExposureRow row;
  row.group_key = "2";
  row.image_total = 5;
  t.rows.push_back(row);
  std::string svg = report::render_svg_bars(t);
  CHECK(svg.find("height=\"0.00\"") != std::string::npos);
  CHECK(svg.find("<line") != std::string::npos);
}

TEST_CASE("svg: byte-identical across repeated renders") {
  auto table = small_table();
  CHECK(report::render_svg_bars(table) == report::render_svg_bars(table));
}

TEST_CASE("exposure csv: write then read recovers the table") {
  oracles::TempDir tmp("expcsv");
  auto table = small_table();
  report::write_exposure_csv(table, tmp.file("e.csv"));
  auto back = report::read_exposure_csv(tmp.file("e.csv"));
  REQUIRE(back.rows.size() == 1);
  CHECK(back.rows[0].group_key == "1");
  CHECK(back.rows[0].image_total == 10);
  CHECK(back.rows[0].ad_count[0] == 2);
  CHECK(back.rows[0].images_with[0] == 2);
  CHECK(back.rows[0].pct_images[0] == 20.0);
  CHECK(back.rows[0].pct_ads[0] == 100.0);
  CHECK(back.total_ads[0] == 2);
}

TEST_CASE("synth: same seed produces byte-identical scenes") {
  oracles::TempDir tmp1("synths1");
  oracles::TempDir tmp2("synths2");
  auto spec = small_spec(777);
  synth::write_scene(synth::generate_scene(spec), spec, tmp1.str());
  synth::write_scene(synth::generate_scene(spec), spec, tmp2.str());
  for (const char* name : {"manifest.jsonl", "truth.json"})
    CHECK(slurp(tmp1.file(name)) == slurp(tmp2.file(name)));
  for (int f = 0; f < spec.frames; ++f) {
    char labels[64], photo[64];
    std::snprintf(labels, sizeof labels, "frames/synth_%06d_labels.pgm", f);
    std::snprintf(photo, sizeof photo, "frames/synth_%06d_photo.pgm", f);
    CHECK(slurp(tmp1.file(labels)) == slurp(tmp2.file(labels)));
    CHECK(slurp(tmp1.file(photo)) == slurp(tmp2.file(photo)));
  }
  // A different seed must change the photos.
  oracles::TempDir tmp3("synths3");
  auto spec2 = small_spec(778);
  synth::write_scene(synth::generate_scene(spec2), spec2, tmp3.str());
  CHECK(slurp(tmp1.file("frames/synth_000000_photo.pgm")) !=
        slurp(tmp3.file("frames/synth_000000_photo.pgm")));
}

TEST_CASE("synth: planted pixel counts equal extraction's filled counts") {
  auto spec = small_spec(4242);
  auto scene = synth::generate_scene(spec);
  REQUIRE(scene.regions.size() == 3);
  for (std::size_t f = 0; f < scene.images.size(); ++f) {
    auto result = extract::extract_ads(scene.labels[f], scene.images[f], {1, 1});
    std::vector<const synth::PlantedRegion*> here;
    for (const auto& r : scene.regions)
      if (r.frame_id == scene.images[f].id) here.push_back(&r);
    REQUIRE(result.ads.size() == here.size());
    for (std::size_t i = 0; i < here.size(); ++i)
      CHECK(result.ads[i].filled_pixels == here[i]->pixel_count);
  }
}

TEST_CASE("synth: a single 2500-px ad is recovered as exactly one ad") {
  synth::SynthSpec spec;
  spec.seed = 1;
  spec.frames = 1;
  spec.frame_width = 320;
  spec.frame_height = 240;
  spec.ads = {{"solo", AdCategory::Food, 2500, {0}, 0, std::nullopt}};
  auto scene = synth::generate_scene(spec);
  auto result = extract::extract_ads(scene.labels[0], scene.images[0], {1, 2000});
  REQUIRE(result.ads.size() == 1);
  CHECK(result.ads[0].filled_pixels == 2500);
}

TEST_CASE("synth: track spacing controls consecutive GPS distances") {
  auto spec = small_spec(10);
  spec.track.spacing_m = 4.0;
  auto scene = synth::generate_scene(spec);
  for (std::size_t i = 1; i < scene.images.size(); ++i) {
    double d = dedup::haversine({scene.images[i - 1].lat, scene.images[i - 1].lon},
                                {scene.images[i].lat, scene.images[i].lon});
    CHECK(d == doctest::Approx(4.0).epsilon(1e-3));
  }
  CHECK(scene.images[0].captured_at == "2020-01-14T10:00:00.000Z");
  CHECK(scene.images[1].captured_at == "2020-01-14T10:00:00.500Z");
  CHECK(scene.images[2].captured_at == "2020-01-14T10:00:01.000Z");
}

TEST_CASE("synth: overlapping plants are a spec error") {
  synth::SynthSpec spec;
  spec.seed = 3;
  spec.frames = 1;
  spec.frame_width = 100;
  spec.frame_height = 100;
  // Two 60x60 ads cannot fit side by side in 100 px.
  spec.ads = {{"a", AdCategory::Food, 3600, {0}, 0, std::nullopt},
              {"b", AdCategory::Other, 3600, {0}, 0, std::nullopt}};
  CHECK_THROWS_AS(synth::generate_scene(spec), InputError);
}

TEST_CASE("runmeta: chain verifies and detects mixing") {
  oracles::TempDir tmp("runmeta");
  runmeta::StageRecord a;
  a.stage = "extract";
  a.timestamp = "t0";
  a.config["min_pixels"] = 2000;
  runmeta::append_stage(tmp.str(), a);
  runmeta::StageRecord b;
  b.stage = "dedup";
  b.timestamp = "t1";
  b.config["tau"] = 60;
  runmeta::append_stage(tmp.str(), b);
  CHECK_FALSE(runmeta::verify_chain(tmp.str()).has_value());
  CHECK(runmeta::has_stage(tmp.str(), "extract"));
  CHECK_FALSE(runmeta::has_stage(tmp.str(), "join"));

  // Tamper: rewrite the second stage's parent hash.
  std::string path = tmp.file("run-manifest.json");
  std::string text = slurp(path);
  auto pos = text.rfind("\"parent_hash\": \"");
  REQUIRE(pos != std::string::npos);
  text.replace(pos + 16, 4, "dead");
  std::ofstream(path, std::ios::trunc) << text;
  CHECK(runmeta::verify_chain(tmp.str()).has_value());
}

}  // TEST_SUITE
