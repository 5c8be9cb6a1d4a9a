#include "adscan/geostat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace adscan {
namespace geostat {

// ---------------------------------------------------------------------------
// Point-in-polygon.

namespace {

bool on_segment(const LatLon& p, const LatLon& a, const LatLon& b) {
  double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
  if (cross != 0.0) return false;
  return p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon) &&
         p.lat >= std::min(a.lat, b.lat) && p.lat <= std::max(a.lat, b.lat);
}

// Crossing parity of a horizontal ray from p toward +lon against one ring.
// Half-open vertex rule avoids double-counting shared endpoints.
bool ray_crosses(const LatLon& p, const std::vector<LatLon>& ring, int& crossings) {
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const LatLon& a = ring[i];
    const LatLon& b = ring[i + 1];
    if (on_segment(p, a, b)) return true;  // boundary counts as inside
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      double x = a.lon + (p.lat - a.lat) / (b.lat - a.lat) * (b.lon - a.lon);
      if (x > p.lon) ++crossings;
    }
  }
  return false;
}

}  // namespace

bool point_in_polygon(const LatLon& pt, const PolygonRings& poly) {
  int crossings = 0;
  for (const auto& ring : poly.rings)
    if (ray_crosses(pt, ring, crossings)) return true;
  return crossings % 2 == 1;
}

bool point_in_area(const LatLon& pt, const AreaUnit& area) {
  for (const auto& poly : area.polygons)
    if (point_in_polygon(pt, poly)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Spatial join via a bounding-box grid.

namespace {

struct Extent {
  double min_lat = std::numeric_limits<double>::infinity();
  double min_lon = std::numeric_limits<double>::infinity();
  double max_lat = -std::numeric_limits<double>::infinity();
  double max_lon = -std::numeric_limits<double>::infinity();

  void grow(const LatLon& p) {
    min_lat = std::min(min_lat, p.lat);
    min_lon = std::min(min_lon, p.lon);
    max_lat = std::max(max_lat, p.lat);
    max_lon = std::max(max_lon, p.lon);
  }
  bool contains(const LatLon& p) const {
    return p.lat >= min_lat && p.lat <= max_lat && p.lon >= min_lon &&
           p.lon <= max_lon;
  }
};

class AreaIndex {
 public:
  explicit AreaIndex(const std::vector<AreaUnit>& areas) : areas_(areas) {
    boxes_.resize(areas.size());
    for (std::size_t i = 0; i < areas.size(); ++i) {
      for (const auto& poly : areas[i].polygons)
        for (const auto& ring : poly.rings)
          for (const auto& p : ring) boxes_[i].grow(p);
      world_.grow({boxes_[i].min_lat, boxes_[i].min_lon});
      world_.grow({boxes_[i].max_lat, boxes_[i].max_lon});
    }
    if (areas.empty()) return;
    cells_.resize(static_cast<std::size_t>(kGrid) * kGrid);
    for (std::size_t i = 0; i < areas.size(); ++i) {
      auto [r0, c0] = cell_of({boxes_[i].min_lat, boxes_[i].min_lon});
      auto [r1, c1] = cell_of({boxes_[i].max_lat, boxes_[i].max_lon});
      for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c)
          cells_[static_cast<std::size_t>(r) * kGrid + c].push_back(i);
    }
  }

  // Indices of areas whose bbox contains the point, ascending (file order).
  std::vector<std::size_t> candidates(const LatLon& p) const {
    std::vector<std::size_t> out;
    if (areas_.empty() || !world_.contains(p)) return out;
    auto [r, c] = cell_of(p);
    for (std::size_t i : cells_[static_cast<std::size_t>(r) * kGrid + c])
      if (boxes_[i].contains(p)) out.push_back(i);
    return out;
  }

 private:
  static constexpr int kGrid = 64;

  std::pair<int, int> cell_of(const LatLon& p) const {
    double lat_span = std::max(world_.max_lat - world_.min_lat, 1e-12);
    double lon_span = std::max(world_.max_lon - world_.min_lon, 1e-12);
    int r = std::clamp(static_cast<int>((p.lat - world_.min_lat) / lat_span * kGrid),
                       0, kGrid - 1);
    int c = std::clamp(static_cast<int>((p.lon - world_.min_lon) / lon_span * kGrid),
                       0, kGrid - 1);
    return {r, c};
  }

  const std::vector<AreaUnit>& areas_;
  std::vector<Extent> boxes_;
  Extent world_;
  std::vector<std::vector<std::size_t>> cells_;
};

}  // namespace

JoinResult join_ads_to_areas(const std::vector<AdInstance>& ads,
                             const std::vector<GeoImage>& images,
                             const std::vector<AreaUnit>& areas) {
  AreaIndex index(areas);
  JoinResult result;

  auto assign = [&](const std::string& id, const LatLon& p,
                    std::map<std::string, std::string>& target,
                    std::vector<std::string>& unassigned, const char* kind) {
    std::vector<std::size_t> hits;
    for (std::size_t i : index.candidates(p))
      if (point_in_area(p, areas[i])) hits.push_back(i);
    if (hits.empty()) {
      unassigned.push_back(id);
      result.warnings.push_back(std::string(kind) + " " + id +
                                " falls in no area polygon");
      return;
    }
    if (hits.size() > 1) {
      std::string codes;
      for (std::size_t i : hits) codes += (codes.empty() ? "" : ", ") + areas[i].code;
      result.warnings.push_back(std::string("overlap: ") + kind + " " + id +
                                " contained in " + codes +
                                "; keeping first by file order");
    }
    target[id] = areas[hits.front()].code;
  };

  for (const auto& im : images)
    assign(im.id, {im.lat, im.lon}, result.image_to_area,
           result.unassigned_images, "image");
  for (const auto& ad : ads)
    assign(ad.ad_id, {ad.lat, ad.lon}, result.ad_to_area, result.unassigned_ads,
           "ad");
  return result;
}

// ---------------------------------------------------------------------------
// Exposure tables.

namespace {

std::string group_key_of(const AreaUnit& area, GroupBy group_by) {
  switch (group_by) {
    case GroupBy::Decile: return std::to_string(area.imd_decile);
    case GroupBy::Supergroup: return std::to_string(area.oac_supergroup);
    case GroupBy::Group: return area.oac_group;
  }
  return "";
}

bool numeric_group(GroupBy g) { return g != GroupBy::Group; }

}  // namespace

ExposureTable exposure_table(const std::vector<GeoImage>& images,
                             const std::vector<AdInstance>& ads,
                             const JoinResult& join,
                             const std::vector<AreaUnit>& areas,
                             GroupBy group_by) {
  std::map<std::string, std::string> code_to_group;
  for (const auto& area : areas) code_to_group[area.code] = group_key_of(area, group_by);

  ExposureTable table;
  table.group_by = group_by;

  std::map<std::string, ExposureRow> rows;
  std::map<std::string, std::string> image_group;  // image id -> group key
  for (const auto& im : images) {
    auto it = join.image_to_area.find(im.id);
    if (it == join.image_to_area.end()) continue;
    const std::string& key = code_to_group.at(it->second);
    auto& row = rows[key];
    row.group_key = key;
    row.image_total++;
    image_group[im.id] = key;
    table.total_images++;
  }

  // (group, category) -> images already counted as containing the category.
  std::map<std::pair<std::string, int>, std::set<std::string>> seen_images;
  for (const auto& ad : ads) {
    if (!ad.category) {
      table.warnings.push_back("ad " + ad.ad_id + " has no category; excluded");
      continue;
    }
    auto it = join.ad_to_area.find(ad.ad_id);
    if (it == join.ad_to_area.end()) continue;
    const std::string& key = code_to_group.at(it->second);
    auto rit = rows.find(key);
    if (rit == rows.end()) {
      table.warnings.push_back("ad " + ad.ad_id + " in group " + key +
                               " which has no images; excluded");
      continue;
    }
    int c = static_cast<int>(*ad.category);
    rit->second.ad_count[c]++;
    table.total_ads[c]++;
    auto ig = image_group.find(ad.source_image);
    if (ig != image_group.end())
      seen_images[{key, c}].insert(ad.source_image);
  }
  for (auto& [key, row] : rows)
    for (int c = 0; c < kCategoryCount; ++c) {
      auto it = seen_images.find({key, c});
      row.images_with[c] = it == seen_images.end()
                               ? 0
                               : static_cast<std::int64_t>(it->second.size());
    }

  for (auto& [key, row] : rows) {
    for (int c = 0; c < kCategoryCount; ++c) {
      row.pct_images[c] =
          row.image_total > 0
              ? 100.0 * static_cast<double>(row.images_with[c]) / row.image_total
              : 0.0;
      row.pct_ads[c] = table.total_ads[c] > 0
                           ? 100.0 * static_cast<double>(row.ad_count[c]) /
                                 table.total_ads[c]
                           : 0.0;
    }
    table.rows.push_back(row);
  }

  std::sort(table.rows.begin(), table.rows.end(),
            [&](const ExposureRow& a, const ExposureRow& b) {
              if (numeric_group(group_by))
                return std::stoi(a.group_key) < std::stoi(b.group_key);
              return a.group_key < b.group_key;
            });
  return table;
}

// ---------------------------------------------------------------------------
// Chi-squared.

namespace {

// ln Gamma, Lanczos-style approximation (Numerical Recipes coefficients).
double gammln(double xx) {
  static const double cof[6] = {76.18009172947146,     -86.50532032941677,
                                24.01409824083091,     -1.231739572450155,
                                0.1208650973866179e-2, -0.5395239384953e-5};
  double x = xx, y = xx;
  double tmp = x + 5.5;
  tmp -= (x + 0.5) * std::log(tmp);
  double ser = 1.000000000190015;
  for (int j = 0; j < 6; ++j) ser += cof[j] / ++y;
  return -tmp + std::log(2.5066282746310005 * ser / x);
}

constexpr int kItMax = 500;
constexpr double kEps = 1e-15;
constexpr double kFpMin = 1e-300;

// Series expansion for P(a, x), accurate for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < kItMax; ++n) {
    ++ap;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - gammln(a));
}

// Continued fraction for Q(a, x), modified Lentz, accurate for x >= a + 1.
double gamma_q_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kItMax; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - gammln(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_p_value(double statistic, int dof) {
  if (statistic < 0.0) throw std::invalid_argument("chi2 statistic < 0");
  if (dof < 1) throw std::invalid_argument("chi2 dof < 1");
  return gamma_q(0.5 * dof, 0.5 * statistic);
}

ChiSquareResult chi_squared(const ChiSquareInput& input) {
  std::vector<ChiSquareGroup> groups = input.groups;
  if (groups.size() < 2)
    throw InputError("chi-squared needs at least 2 groups");

  std::int64_t total_count = 0, total_images = 0;
  for (const auto& g : groups) {
    total_count += g.category_count;
    total_images += g.image_total;
  }
  if (total_count < 1) throw InputError("chi-squared needs a nonzero total count");
  if (total_images < 1) throw InputError("chi-squared needs nonzero image totals");

  ChiSquareResult result;

  // Zero image totals give zero expected counts; merge those groups into the
  // smaller adjacent group so totals are preserved.
  for (std::size_t i = 0; i < groups.size();) {
    if (groups[i].image_total > 0) {
      ++i;
      continue;
    }
    if (groups.size() == 1) break;
    std::size_t target;
    if (i == 0) target = 1;
    else if (i + 1 == groups.size()) target = i - 1;
    else target = groups[i - 1].image_total <= groups[i + 1].image_total ? i - 1 : i + 1;
    result.warnings.push_back("group " + groups[i].group_key +
                              " has zero expected count; merged into " +
                              groups[target].group_key);
    groups[target].image_total += groups[i].image_total;
    groups[target].category_count += groups[i].category_count;
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(i));
    i = 0;  // restart; merging can relocate neighbours
  }
  if (groups.size() < 2)
    throw InputError("chi-squared degenerated to fewer than 2 groups");

  double statistic = 0.0;
  for (const auto& g : groups) {
    double expected = static_cast<double>(total_count) * g.image_total / total_images;
    double diff = static_cast<double>(g.category_count) - expected;
    statistic += diff * diff / expected;
  }
  result.statistic = statistic;
  result.dof = static_cast<int>(groups.size()) - 1;
  result.p_value = chi2_p_value(statistic, result.dof);
  result.stars = stars_for(result.p_value);
  return result;
}

// ---------------------------------------------------------------------------
// Segmentation metrics.

IouResult iou(const LabelRaster& a, const LabelRaster& b) {
  if (a.width != b.width || a.height != b.height)
    throw InputError("iou: mask dimensions differ (" + std::to_string(a.width) +
                     "x" + std::to_string(a.height) + " vs " +
                     std::to_string(b.width) + "x" + std::to_string(b.height) + ")");
  std::int64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    bool pa = a.pixels[i] != 0, pb = b.pixels[i] != 0;
    inter += pa && pb;
    uni += pa || pb;
  }
  if (uni == 0) return {1.0, true};
  return {static_cast<double>(inter) / static_cast<double>(uni), false};
}

std::vector<ClassIoU> per_class_iou(const LabelRaster& gt, const LabelRaster& pred) {
  if (gt.width != pred.width || gt.height != pred.height)
    throw InputError("per_class_iou: raster dimensions differ");
  std::set<int> classes;
  std::set<int> gt_classes;
  for (auto v : gt.pixels) {
    classes.insert(v);
    gt_classes.insert(v);
  }
  for (auto v : pred.pixels) classes.insert(v);

  std::vector<ClassIoU> out;
  for (int c : classes) {
    std::int64_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < gt.pixels.size(); ++i) {
      bool pa = gt.pixels[i] == c, pb = pred.pixels[i] == c;
      inter += pa && pb;
      uni += pa || pb;
    }
    ClassIoU ci;
    ci.class_id = c;
    ci.in_gt = gt_classes.count(c) > 0;
    ci.both_empty = uni == 0;
    ci.iou = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    out.push_back(ci);
  }
  return out;
}

double mean_iou(const std::vector<ClassIoU>& per_class) {
  double sum = 0.0;
  int n = 0;
  for (const auto& c : per_class)
    if (c.in_gt) {
      sum += c.iou;
      ++n;
    }
  return n > 0 ? sum / n : 0.0;
}

DetectionCounts detection_counts(const std::vector<LabelRaster>& pred_masks,
                                 const std::vector<LabelRaster>& gt_masks,
                                 std::int64_t min_px, double iou_match) {
  auto popcount = [](const LabelRaster& m) {
    std::int64_t c = 0;
    for (auto v : m.pixels) c += v != 0;
    return c;
  };
  std::vector<std::size_t> gt_keep;
  for (std::size_t i = 0; i < gt_masks.size(); ++i)
    if (popcount(gt_masks[i]) >= min_px) gt_keep.push_back(i);

  struct Pair {
    double iou;
    std::size_t pred, gt;
  };
  std::vector<Pair> pairs;
  for (std::size_t p = 0; p < pred_masks.size(); ++p)
    for (std::size_t g : gt_keep) {
      IouResult r = iou(pred_masks[p], gt_masks[g]);
      if (!r.both_empty && r.value >= iou_match) pairs.push_back({r.value, p, g});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.pred != b.pred) return a.pred < b.pred;
    return a.gt < b.gt;
  });

  std::vector<bool> pred_used(pred_masks.size(), false);
  std::vector<bool> gt_used(gt_masks.size(), false);
  DetectionCounts counts;
  for (const auto& pr : pairs) {
    if (pred_used[pr.pred] || gt_used[pr.gt]) continue;
    pred_used[pr.pred] = true;
    gt_used[pr.gt] = true;
    counts.matched++;
  }
  counts.false_positives = static_cast<int>(pred_masks.size()) - counts.matched;
  counts.missed = static_cast<int>(gt_keep.size()) - counts.matched;
  return counts;
}

}  // namespace geostat
}  // namespace adscan
