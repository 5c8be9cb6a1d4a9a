#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "adscan/csv.hpp"
#include "adscan/report.hpp"
#include "adscan/serial.hpp"
#include "oracles.hpp"

using namespace adscan;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  std::string cmd = std::string(ADSCAN_BIN) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

// Scene: 4 distinct ads, one of which repeats in 3 consecutive frames.
const char* kSceneSpec = R"({
  "seed": 20200114,
  "frames": 6,
  "frame_width": 480,
  "frame_height": 360,
  "billboard_class": 1,
  "track": {"start_lat": 53.4, "start_lon": -2.98, "heading_deg": 90.0, "spacing_m": 4.0},
  "ads": [
    {"true_id": "dup", "category": "food", "size_px": 4900, "frames": [0, 1, 2], "jitter_px": 2},
    {"true_id": "solo1", "category": "alcohol", "size_px": 3600, "frames": [3], "jitter_px": 0},
    {"true_id": "solo2", "category": "gambling", "size_px": 2500, "frames": [4], "jitter_px": 0},
    {"true_id": "small", "category": "other", "size_px": 1600, "frames": [5], "jitter_px": 0}
  ]
})";

// One decile-3 area covering the whole track, plus a decile-7 area elsewhere.
const char* kAreas = R"({
  "type": "FeatureCollection",
  "features": [
    {"type": "Feature",
     "properties": {"code": "E01", "imd_decile": 3, "oac_supergroup": 2, "oac_group": "2a"},
     "geometry": {"type": "Polygon", "coordinates": [[[-3.1,53.3],[-2.8,53.3],[-2.8,53.5],[-3.1,53.5],[-3.1,53.3]]]}},
    {"type": "Feature",
     "properties": {"code": "E02", "imd_decile": 7, "oac_supergroup": 4, "oac_group": "4b"},
     "geometry": {"type": "Polygon", "coordinates": [[[-2.8,53.3],[-2.5,53.3],[-2.5,53.5],[-2.8,53.5],[-2.8,53.3]]]}}
  ]
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("full pipeline runs end to end with the expected artifacts") {
  oracles::TempDir tmp("pipeline");
  std::string run = tmp.str();
  write_file(tmp.file("scene.json"), kSceneSpec);
  write_file(tmp.file("areas.geojson"), kAreas);

  REQUIRE(run_cli("synth --spec " + tmp.file("scene.json") + " --out " + run) == 0);
  REQUIRE(fs::exists(tmp.file("manifest.jsonl")));
  REQUIRE(fs::exists(tmp.file("truth.json")));

  REQUIRE(run_cli("extract --manifest " + tmp.file("manifest.jsonl") +
                  " --billboard-class 1 --min-pixels 2000 --out " + run) == 0);
  auto ads = serial::load_ads_jsonl(tmp.file("ads.jsonl"));
  CHECK(ads.size() == 5);  // 3 + 1 + 1; the 1600-px plant is filtered

  REQUIRE(run_cli("rectify --manifest " + tmp.file("manifest.jsonl") + " --ads " +
                  tmp.file("ads.jsonl") + " --out " + run) == 0);
  auto rectified = serial::load_ads_jsonl(tmp.file("rectified.jsonl"));
  for (const auto& ad : rectified) {
    REQUIRE(!ad.crop_ref.empty());
    CHECK(fs::exists(run + "/" + ad.crop_ref));
  }

  REQUIRE(run_cli("dedup --ads " + tmp.file("rectified.jsonl") +
                  " --tau 60 --distance 10 --out " + run) == 0);
  auto survivors = serial::load_ads_jsonl(tmp.file("survivors.jsonl"));
  CHECK(survivors.size() == 3);  // dup triple collapses to one
  csv::Table dups = csv::read_file(tmp.file("duplicates.csv"));
  CHECK(dups.rows.size() == 2);

  // Labels via predictions generated from the survivors.
  std::string preds = "ad_id,category\n";
  const char* cats[] = {"food", "alcohol", "gambling"};
  for (std::size_t i = 0; i < survivors.size(); ++i)
    preds += survivors[i].ad_id + "," + cats[i % 3] + "\n";
  write_file(tmp.file("preds.csv"), preds);
  REQUIRE(run_cli("label --ads " + tmp.file("survivors.jsonl") + " --predictions " +
                  tmp.file("preds.csv") + " --out " + run) == 0);
  REQUIRE(fs::exists(tmp.file("labeled.jsonl")));

  REQUIRE(run_cli("join --ads " + tmp.file("labeled.jsonl") + " --manifest " +
                  tmp.file("manifest.jsonl") + " --areas " + tmp.file("areas.geojson") +
                  " --out " + run) == 0);
  csv::Table assignments = csv::read_file(tmp.file("assignments.csv"));
  CHECK(assignments.rows.size() == 3);
  for (const auto& row : assignments.rows) CHECK(row[1] == "E01");

  REQUIRE(run_cli("analyze --manifest " + tmp.file("manifest.jsonl") +
                  " --group-by decile --out " + run) == 0);
  REQUIRE(fs::exists(tmp.file("exposure_decile.csv")));
  REQUIRE(fs::exists(tmp.file("chi_square_decile.csv")));
  auto table = report::read_exposure_csv(tmp.file("exposure_decile.csv"));
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].group_key == "3");
  CHECK(table.rows[0].image_total == 6);

  REQUIRE(run_cli("report --out " + run) == 0);
  CHECK(fs::exists(tmp.file("ads.geojson")));
  CHECK(fs::exists(tmp.file("exposure_decile.svg")));
  CHECK(report::parse_ads_geojson(tmp.file("ads.geojson")).size() == 3);
}

TEST_CASE("extract reruns are byte-identical; the run manifest differs only in time") {
  oracles::TempDir tmp("rerun");
  write_file(tmp.file("scene.json"), kSceneSpec);
  REQUIRE(run_cli("synth --spec " + tmp.file("scene.json") + " --out " + tmp.str()) == 0);
  fs::create_directories(tmp.file("runA"));
  fs::create_directories(tmp.file("runB"));
  REQUIRE(run_cli("extract --manifest " + tmp.file("manifest.jsonl") + " --out " +
                  tmp.file("runA")) == 0);
  REQUIRE(run_cli("extract --manifest " + tmp.file("manifest.jsonl") + " --out " +
                  tmp.file("runB")) == 0);
  CHECK(slurp(tmp.file("runA/ads.jsonl")) == slurp(tmp.file("runB/ads.jsonl")));
}

TEST_CASE("analyze before join fails with a stage-order error") {
  oracles::TempDir tmp("nojoin");
  write_file(tmp.file("scene.json"), kSceneSpec);
  REQUIRE(run_cli("synth --spec " + tmp.file("scene.json") + " --out " + tmp.str()) == 0);
  REQUIRE(run_cli("extract --manifest " + tmp.file("manifest.jsonl") + " --out " +
                  tmp.str()) == 0);
  std::string cmd = std::string(ADSCAN_BIN) + " analyze --manifest " +
                    tmp.file("manifest.jsonl") + " --group-by decile --out " +
                    tmp.str() + " 2>" + tmp.file("err.txt") + " >/dev/null";
  int rc = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(rc) == 1);
  CHECK(slurp(tmp.file("err.txt")).find("join required before analyze") !=
        std::string::npos);
}

TEST_CASE("bad inputs exit with code 1") {
  oracles::TempDir tmp("badinput");
  CHECK(run_cli("extract --manifest /nonexistent.jsonl --out " + tmp.str()) == 1);
  CHECK(run_cli("extract --no-such-flag") == 1);
  CHECK(run_cli("") == 1);
}

TEST_CASE("eval produces classification reports from CSVs") {
  oracles::TempDir tmp("evalcli");
  write_file(tmp.file("truth.csv"),
             "ad_id,category\na,food\nb,food\nc,other\nd,other\n");
  write_file(tmp.file("preds.csv"),
             "ad_id,category\na,food\nb,other\nc,other\nd,other\n");
  REQUIRE(run_cli("eval --preds " + tmp.file("preds.csv") + " --truth " +
                  tmp.file("truth.csv") + " --out " + tmp.str()) == 0);
  csv::Table t = csv::read_file(tmp.file("eval_report.csv"));
  REQUIRE(t.rows.size() == 5);  // 4 classes + weighted
  CHECK(t.rows[0][0] == "food");
  CHECK(t.rows[0][1] == "1");    // precision 1.0
  CHECK(t.rows[0][2] == "0.5");  // recall
  CHECK(fs::exists(tmp.file("confusion.csv")));
}

TEST_CASE("eval produces segmentation reports from rasters") {
  oracles::TempDir tmp("evalseg");
  // Identical 80x80 rasters with one 50x50 block of class 1.
  std::string header = "P5 80 80 255\n";
  std::string data(6400, '\0');
  for (int y = 10; y < 60; ++y)
    for (int x = 10; x < 60; ++x) data[static_cast<std::size_t>(y) * 80 + x] = 1;
  write_file(tmp.file("gt.pgm"), header + data);
  write_file(tmp.file("pred.pgm"), header + data);
  REQUIRE(run_cli("eval --gt-raster " + tmp.file("gt.pgm") + " --pred-raster " +
                  tmp.file("pred.pgm") + " --min-pixels 2000 --out " + tmp.str()) == 0);
  csv::Table t = csv::read_file(tmp.file("seg_eval.csv"));
  bool found_miou = false, found_matched = false;
  for (const auto& row : t.rows) {
    if (row[0] == "mean_iou") {
      CHECK(row[2] == "1");
      found_miou = true;
    }
    if (row[0] == "matched") {
      CHECK(row[2] == "1");
      found_matched = true;
    }
  }
  CHECK(found_miou);
  CHECK(found_matched);
}

TEST_CASE("ADSCAN_OUT provides the default output root") {
  oracles::TempDir tmp("envout");
  write_file(tmp.file("scene.json"), kSceneSpec);
  std::string cmd = "ADSCAN_OUT=" + tmp.str() + " " + std::string(ADSCAN_BIN) +
                    " synth --spec " + tmp.file("scene.json") + " >/dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  CHECK(fs::exists(tmp.file("manifest.jsonl")));
}

}  // TEST_SUITE
