#include <doctest.h>

#include <cmath>
#include <random>

#include "adscan/geostat.hpp"
#include "oracles.hpp"

using namespace adscan;
using geostat::chi2_p_value;
using geostat::chi_squared;
using geostat::point_in_polygon;

namespace {

PolygonRings square(double lat0, double lon0, double lat1, double lon1) {
  PolygonRings p;
  p.rings.push_back({{lat0, lon0}, {lat0, lon1}, {lat1, lon1}, {lat1, lon0},
                     {lat0, lon0}});
  return p;
}

// Concave "staircase" polygon around the origin.
PolygonRings concave_polygon() {
  PolygonRings p;
  p.rings.push_back({{0, 0}, {0, 10}, {4, 10}, {4, 4}, {8, 4}, {8, 10},
                     {10, 10}, {10, 0}, {0, 0}});
  return p;
}

AreaUnit area(const std::string& code, PolygonRings poly, int decile,
              const std::string& group) {
  AreaUnit a;
  a.code = code;
  a.polygons.push_back(std::move(poly));
  a.imd_decile = decile;
  a.oac_group = group;
  a.oac_supergroup = group[0] - '0';
  return a;
}

GeoImage image_at(const std::string& id, double lat, double lon) {
  GeoImage im;
  im.id = id;
  im.lat = lat;
  im.lon = lon;
  im.width = 100;
  im.height = 100;
  im.raster_ref = "r.pgm";
  return im;
}

AdInstance ad_at(const std::string& id, const std::string& source, double lat,
                 double lon, AdCategory cat) {
  AdInstance ad;
  ad.ad_id = id;
  ad.source_image = source;
  ad.hull = {{0, 0}, {60, 0}, {60, 60}, {0, 60}};
  ad.component_pixels = 3600;
  ad.filled_pixels = 3721;
  ad.bbox = {0, 0, 60, 60};
  ad.lat = lat;
  ad.lon = lon;
  ad.category = cat;
  return ad;
}

LabelRaster mask_of(int w, int h, int x0, int y0, int x1, int y1) {
  LabelRaster m;
  m.width = w;
  m.height = h;
  m.pixels.assign(static_cast<std::size_t>(w) * h, 0);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) m.set(x, y, 1);
  return m;
}

}  // namespace

TEST_SUITE("geostat") {

TEST_CASE("point_in_polygon: interior, exterior, boundary") {
  PolygonRings sq = square(0, 0, 10, 10);
  CHECK(point_in_polygon({5, 5}, sq));
  CHECK_FALSE(point_in_polygon({15, 5}, sq));
  CHECK_FALSE(point_in_polygon({5, -1}, sq));
  // Exactly on edges and corners counts as inside.
  CHECK(point_in_polygon({0, 5}, sq));
  CHECK(point_in_polygon({10, 5}, sq));
  CHECK(point_in_polygon({5, 0}, sq));
  CHECK(point_in_polygon({0, 0}, sq));
}

TEST_CASE("point_in_polygon: holes are outside, hole edges inside") {
  PolygonRings donut = square(0, 0, 10, 10);
  donut.rings.push_back({{4, 4}, {4, 6}, {6, 6}, {6, 4}, {4, 4}});
  CHECK(point_in_polygon({2, 2}, donut));
  CHECK_FALSE(point_in_polygon({5, 5}, donut));
  CHECK(point_in_polygon({4, 5}, donut));  // on the hole edge
}

TEST_CASE("point_in_polygon: agrees with the winding-number oracle") {
  std::mt19937_64 rng(2718);
  PolygonRings shapes[3] = {square(0, 0, 10, 10), concave_polygon(),
                            square(-5, -5, 5, 5)};
  shapes[2].rings.push_back({{-2, -2}, {-2, 2}, {2, 2}, {2, -2}, {-2, -2}});
  for (const auto& poly : shapes) {
    for (int i = 0; i < 2000; ++i) {
      LatLon p{oracles::rng_real(rng, -6, 12), oracles::rng_real(rng, -6, 12)};
      CHECK(point_in_polygon(p, poly) == oracles::winding_polygon_inside(p, poly));
    }
  }
}

TEST_CASE("join: containment, sea points, and overlaps") {
  std::vector<AreaUnit> areas{
      area("E01", square(53.0, -3.0, 53.5, -2.5), 3, "2a"),
      area("E02", square(53.5, -3.0, 54.0, -2.5), 7, "4b"),
      area("E03", square(53.4, -3.0, 53.6, -2.5), 5, "5a"),  // overlaps both
  };
  std::vector<GeoImage> images{image_at("i1", 53.2, -2.7),
                               image_at("i2", 10.0, 10.0)};
  std::vector<AdInstance> ads{
      ad_at("a1", "i1", 53.2, -2.7, AdCategory::Food),
      ad_at("a2", "i1", 53.45, -2.7, AdCategory::Other),  // E01 and E03
      ad_at("a3", "i2", 10.0, 10.0, AdCategory::Food),    // nowhere
  };
  auto join = geostat::join_ads_to_areas(ads, images, areas);
  CHECK(join.ad_to_area.at("a1") == "E01");
  CHECK(join.ad_to_area.at("a2") == "E01");  // first by file order
  CHECK(join.ad_to_area.count("a3") == 0);
  CHECK(join.unassigned_ads == std::vector<std::string>{"a3"});
  CHECK(join.image_to_area.at("i1") == "E01");
  CHECK(join.unassigned_images == std::vector<std::string>{"i2"});
  bool overlap_warned = false;
  for (const auto& w : join.warnings)
    if (w.find("overlap") != std::string::npos &&
        w.find("E01") != std::string::npos && w.find("E03") != std::string::npos)
      overlap_warned = true;
  CHECK(overlap_warned);
}

TEST_CASE("exposure: percentages from direct counts") {
  std::vector<AreaUnit> areas{area("E01", square(53.0, -3.0, 54.0, -2.0), 3, "2a")};
  std::vector<GeoImage> images;
  for (int i = 0; i < 10; ++i)
    images.push_back(image_at("i" + std::to_string(i), 53.5, -2.5));
  // 2 food ads in 2 distinct images.
  std::vector<AdInstance> ads{
      ad_at("a1", "i0", 53.5, -2.5, AdCategory::Food),
      ad_at("a2", "i1", 53.5, -2.5, AdCategory::Food),
  };
  auto join = geostat::join_ads_to_areas(ads, images, areas);
  auto table = geostat::exposure_table(images, ads, join, areas, GroupBy::Decile);
  REQUIRE(table.rows.size() == 1);
  const auto& row = table.rows[0];
  CHECK(row.group_key == "3");
  CHECK(row.image_total == 10);
  int f = static_cast<int>(AdCategory::Food);
  CHECK(row.ad_count[f] == 2);
  CHECK(row.images_with[f] == 2);
  CHECK(row.pct_images[f] == 20.0);
  CHECK(row.pct_ads[f] == 100.0);
}

TEST_CASE("exposure: no ads means all-zero percentages") {
  std::vector<AreaUnit> areas{area("E01", square(53.0, -3.0, 54.0, -2.0), 1, "1a")};
  std::vector<GeoImage> images{image_at("i0", 53.5, -2.5)};
  auto join = geostat::join_ads_to_areas({}, images, areas);
  auto table = geostat::exposure_table({images}, {}, join, areas, GroupBy::Decile);
  REQUIRE(table.rows.size() == 1);
  for (int c = 0; c < kCategoryCount; ++c) {
    CHECK(table.rows[0].pct_images[c] == 0.0);
    CHECK(table.rows[0].ad_count[c] == 0);
  }
}

TEST_CASE("exposure: per-category column sums equal assigned totals") {
  std::mt19937_64 rng(808);
  std::vector<AreaUnit> areas;
  for (int d = 1; d <= 5; ++d)
    areas.push_back(area("E0" + std::to_string(d),
                         square(53.0 + d, -3.0, 53.5 + d, -2.0), d,
                         "2a"));
  std::vector<GeoImage> images;
  std::vector<AdInstance> ads;
  for (int i = 0; i < 60; ++i) {
    int d = oracles::rng_int(rng, 1, 5);
    double lat = 53.2 + d, lon = -2.5;
    std::string img_id = "i" + std::to_string(i);
    images.push_back(image_at(img_id, lat, lon));
    if (i % 2 == 0)
      ads.push_back(ad_at("a" + std::to_string(i), img_id, lat, lon,
                          kAllCategories[static_cast<std::size_t>(
                              oracles::rng_int(rng, 0, 3))]));
  }
  auto join = geostat::join_ads_to_areas(ads, images, areas);
  auto table = geostat::exposure_table(images, ads, join, areas, GroupBy::Decile);
  std::array<std::int64_t, kCategoryCount> sums{};
  for (const auto& row : table.rows) {
    for (int c = 0; c < kCategoryCount; ++c) {
      sums[c] += row.ad_count[c];
      CHECK(row.images_with[c] <= row.image_total);
      CHECK(row.ad_count[c] >= row.images_with[c]);
      CHECK(row.pct_images[c] >= 0.0);
      CHECK(row.pct_images[c] <= 100.0);
    }
  }
  CHECK(sums == table.total_ads);
}

TEST_CASE("chi_squared: proportional observations give statistic 0") {
  geostat::ChiSquareInput input;
  input.groups = {{"1", 100, 10}, {"2", 200, 20}, {"3", 300, 30}};
  auto r = chi_squared(input);
  CHECK(r.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(1.0));
  CHECK(r.stars == "");
  CHECK(r.dof == 2);
}

TEST_CASE("chi_squared: two groups, hand-computed statistic of 10") {
  geostat::ChiSquareInput input;
  input.groups = {{"1", 100, 30}, {"2", 100, 10}};
  auto r = chi_squared(input);
  CHECK(r.statistic == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(r.dof == 1);
}

TEST_CASE("chi_squared: invariant under group permutation") {
  geostat::ChiSquareInput a, b;
  a.groups = {{"1", 50, 4}, {"2", 80, 11}, {"3", 120, 7}, {"4", 60, 9}};
  b.groups = {a.groups[2], a.groups[0], a.groups[3], a.groups[1]};
  CHECK(chi_squared(a).statistic == doctest::Approx(chi_squared(b).statistic));
}

TEST_CASE("chi_squared: zero-image groups merge into the smaller neighbour") {
  geostat::ChiSquareInput input;
  input.groups = {{"1", 100, 10}, {"2", 0, 5}, {"3", 40, 3}};
  auto r = chi_squared(input);
  CHECK(r.dof == 1);  // merged down to 2 groups
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("group 2") != std::string::npos);
  CHECK(r.warnings[0].find("merged into 3") != std::string::npos);
  // Totals preserved: 18 observations against 140 images.
  geostat::ChiSquareInput merged;
  merged.groups = {{"1", 100, 10}, {"3", 40, 8}};
  CHECK(r.statistic == doctest::Approx(chi_squared(merged).statistic));
}

TEST_CASE("chi2_p_value: matches closed forms to 1e-8") {
  for (double x : {0.1, 1.0, 5.0, 20.0, 80.0}) {
    CHECK(std::fabs(chi2_p_value(x, 2) - std::exp(-x / 2)) < 1e-8);
    CHECK(std::fabs(chi2_p_value(x, 1) - std::erfc(std::sqrt(x / 2))) < 1e-8);
  }
  CHECK(chi2_p_value(0.0, 5) == 1.0);
  CHECK(std::fabs(chi2_p_value(5.991, 2) - 0.05004) < 1e-4);
  CHECK(std::fabs(chi2_p_value(3.841, 1) - 0.05001) < 1e-4);
}

TEST_CASE("chi2_p_value: strictly decreasing in the statistic") {
  for (int dof : {1, 2, 7, 9, 25}) {
    double prev = 1.0;
    for (double x = 0.5; x < 120; x += 1.7) {
      double p = chi2_p_value(x, dof);
      // Strict decrease except where the double saturates at exactly 1.
      CHECK((p < prev || (p == 1.0 && prev == 1.0)));
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      prev = p;
    }
  }
}

TEST_CASE("chi2 stars: published statistics map to the published pattern") {
  // Deprivation column at dof 9 (10 deciles), OAC column at dof 7
  // (8 supergroups).
  CHECK(stars_for(chi2_p_value(70.99, 9)) == "***");   // alcohol / deprivation
  CHECK(stars_for(chi2_p_value(686.16, 9)) == "***");  // food / deprivation
  CHECK(stars_for(chi2_p_value(11.16, 9)) == "");      // gambling / deprivation
  CHECK(stars_for(chi2_p_value(628.95, 9)) == "***");  // other / deprivation
  CHECK(stars_for(chi2_p_value(120.62, 7)) == "***");  // alcohol / OAC
  CHECK(stars_for(chi2_p_value(301.97, 7)) == "***");  // food / OAC
  CHECK(stars_for(chi2_p_value(25.14, 7)) == "***");   // gambling / OAC
  CHECK(stars_for(chi2_p_value(976.67, 7)) == "***");  // other / OAC
  // The null gambling/deprivation cell stays unstarred for any dof >= 6.
  for (int dof = 6; dof <= 25; ++dof)
    CHECK(stars_for(chi2_p_value(11.16, dof)) == "");
}

TEST_CASE("iou: hand cases") {
  auto a = mask_of(10, 10, 0, 0, 4, 9);   // left half
  auto b = mask_of(10, 10, 0, 0, 9, 9);   // full frame
  CHECK(geostat::iou(a, b).value == 0.5);
  auto r01 = mask_of(3, 3, 0, 0, 2, 1);   // rows 0-1
  auto r12 = mask_of(3, 3, 0, 1, 2, 2);   // rows 1-2
  CHECK(geostat::iou(r01, r12).value == doctest::Approx(1.0 / 3.0));
  CHECK(geostat::iou(a, a).value == 1.0);
  auto empty = mask_of(10, 10, 0, 0, -1, -1);
  auto res = geostat::iou(empty, empty);
  CHECK(res.value == 1.0);
  CHECK(res.both_empty);
  auto c = mask_of(10, 10, 6, 0, 9, 9);
  CHECK(geostat::iou(a, c).value == 0.0);
}

TEST_CASE("iou: symmetric, bounded, identity of indiscernibles") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    LabelRaster a, b;
    a.width = b.width = 16;
    a.height = b.height = 16;
    for (int i = 0; i < 256; ++i) {
      a.pixels.push_back(rng() % 3 == 0);
      b.pixels.push_back(rng() % 3 == 0);
    }
    auto ab = geostat::iou(a, b);
    auto ba = geostat::iou(b, a);
    CHECK(ab.value == ba.value);
    CHECK(ab.value >= 0.0);
    CHECK(ab.value <= 1.0);
    bool identical = a.pixels == b.pixels;
    if (!ab.both_empty) CHECK((ab.value == 1.0) == identical);
  }
}

TEST_CASE("iou: dimension mismatch is an error") {
  CHECK_THROWS_AS(geostat::iou(mask_of(4, 4, 0, 0, 1, 1), mask_of(5, 4, 0, 0, 1, 1)),
                  InputError);
}

TEST_CASE("mean_iou: averages only over classes present in ground truth") {
  std::vector<geostat::ClassIoU> per_class{
      {0, 0.8, true, false}, {1, 0.4, true, false}, {2, 0.1, false, false}};
  CHECK(geostat::mean_iou(per_class) == doctest::Approx(0.6));
}

TEST_CASE("per_class_iou: counts class overlap per id") {
  LabelRaster gt, pred;
  gt.width = pred.width = 4;
  gt.height = pred.height = 1;
  gt.pixels = {0, 1, 1, 2};
  pred.pixels = {0, 1, 2, 2};
  auto per_class = geostat::per_class_iou(gt, pred);
  REQUIRE(per_class.size() == 3);
  CHECK(per_class[0].iou == 1.0);                      // class 0: exact
  CHECK(per_class[1].iou == doctest::Approx(0.5));     // class 1: 1 of 2
  CHECK(per_class[2].iou == doctest::Approx(0.5));     // class 2: 1 of 2
  CHECK(geostat::mean_iou(per_class) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("detection_counts: identical sets all match") {
  std::vector<LabelRaster> masks{mask_of(20, 20, 0, 0, 5, 5),
                                 mask_of(20, 20, 10, 10, 15, 15)};
  auto counts = geostat::detection_counts(masks, masks, 1, 0.5);
  CHECK(counts.matched == 2);
  CHECK(counts.false_positives == 0);
  CHECK(counts.missed == 0);
}

TEST_CASE("detection_counts: non-overlapping prediction is a false positive") {
  std::vector<LabelRaster> preds{mask_of(20, 20, 0, 0, 3, 3)};
  std::vector<LabelRaster> gts{mask_of(20, 20, 10, 10, 13, 13)};
  auto counts = geostat::detection_counts(preds, gts, 1, 0.5);
  CHECK(counts.matched == 0);
  CHECK(counts.false_positives == 1);
  CHECK(counts.missed == 1);
}

TEST_CASE("detection_counts: greedy matching leaves the unpaired GT missed") {
  // 3 GT; 2 preds each overlapping a distinct GT at IoU >= 0.5.
  std::vector<LabelRaster> gts{mask_of(40, 40, 0, 0, 9, 9),
                               mask_of(40, 40, 20, 0, 29, 9),
                               mask_of(40, 40, 0, 20, 9, 29)};
  std::vector<LabelRaster> preds{mask_of(40, 40, 0, 2, 9, 11),    // IoU 0.667 with gt0
                                 mask_of(40, 40, 20, 2, 29, 11)}; // IoU 0.667 with gt1
  auto counts = geostat::detection_counts(preds, gts, 1, 0.5);
  CHECK(counts.matched == 2);
  CHECK(counts.false_positives == 0);
  CHECK(counts.missed == 1);
}

TEST_CASE("detection_counts: ground truth under min_px is dropped first") {
  std::vector<LabelRaster> gts{mask_of(40, 40, 0, 0, 9, 9),   // 100 px
                               mask_of(40, 40, 20, 20, 22, 22)};  // 9 px
  std::vector<LabelRaster> preds{mask_of(40, 40, 0, 0, 9, 9)};
  auto counts = geostat::detection_counts(preds, gts, 50, 0.5);
  CHECK(counts.matched == 1);
  CHECK(counts.missed == 0);  // the small GT never entered
}

}  // TEST_SUITE
