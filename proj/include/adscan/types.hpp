#ifndef ADSCAN_TYPES_HPP
#define ADSCAN_TYPES_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adscan {

// ---------------------------------------------------------------------------
// Advertisement content categories.

enum class AdCategory : int { Food = 0, Alcohol = 1, Gambling = 2, Other = 3 };

inline constexpr int kCategoryCount = 4;

inline constexpr std::array<AdCategory, kCategoryCount> kAllCategories = {
    AdCategory::Food, AdCategory::Alcohol, AdCategory::Gambling,
    AdCategory::Other};

const char* category_name(AdCategory c);
std::optional<AdCategory> parse_category(const std::string& token);

// ---------------------------------------------------------------------------
// Geometry primitives shared across modules.

struct PixelPoint {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

struct BBox {
  int min_x = 0;
  int min_y = 0;
  int max_x = 0;
  int max_y = 0;

  bool contains(const PixelPoint& p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
  friend bool operator==(const BBox&, const BBox&) = default;
};

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
  friend bool operator==(const LatLon&, const LatLon&) = default;
};

// ---------------------------------------------------------------------------
// One geo-tagged street-level frame plus its label-raster reference.

struct GeoImage {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
  std::string captured_at;  // UTC timestamp, ISO 8601
  int width = 0;
  int height = 0;
  std::string raster_ref;
  std::string image_ref;  // optional color/gray photo; empty = none
};

// Per-pixel class-id raster. Class ids fit one byte (0-255).
struct LabelRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, size = width*height

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  void set(int x, int y, std::uint8_t v) {
    pixels[static_cast<std::size_t>(y) * width + x] = v;
  }
  bool valid() const {
    return width >= 1 && height >= 1 &&
           pixels.size() == static_cast<std::size_t>(width) * height;
  }
};

// ---------------------------------------------------------------------------
// One extracted advertisement.
//
// Geo-location is inherited from the source frame: street-level capture has
// no depth, so the camera position stands in for the billboard position.

struct AdInstance {
  std::string ad_id;
  std::string source_image;
  std::vector<PixelPoint> hull;  // convex, CCW (positive shoelace)
  std::int64_t component_pixels = 0;
  std::int64_t filled_pixels = 0;
  BBox bbox;
  double lat = 0.0;
  double lon = 0.0;
  std::optional<AdCategory> category;
  std::string crop_ref;  // rectified crop path; empty = none
};

struct DedupConfig {
  int tau = 60;             // minimum matching-feature count
  double distance_m = 10.0; // geodesic pairing gate
  double ratio = 0.75;      // nearest-neighbour ratio test
  bool strict_tau = false;  // true: require count > tau instead of >= tau
};

// ---------------------------------------------------------------------------
// Socio-demographic area polygons (LSOA / OA).

// One simple polygon: outer ring first, optional hole rings after.
// Rings are closed (first vertex repeated as last).
struct PolygonRings {
  std::vector<std::vector<LatLon>> rings;
};

struct AreaUnit {
  std::string code;
  std::vector<PolygonRings> polygons;  // MultiPolygon flattened
  int imd_decile = 0;                  // 1 = most deprived
  int oac_supergroup = 0;              // 1-8
  std::string oac_group;               // e.g. "2a"
};

// 2011 Output Area Classification taxonomy: 8 Supergroups, 26 Groups.
bool valid_oac_group(const std::string& group);
int oac_supergroup_of(const std::string& group);  // 0 if malformed
const char* oac_supergroup_name(int supergroup);  // "" if unknown
const char* oac_group_name(const std::string& group);
std::vector<std::string> all_oac_groups();

// ---------------------------------------------------------------------------
// Exposure tables and the chi-squared test over them.

enum class GroupBy { Decile, Supergroup, Group };

const char* group_by_name(GroupBy g);
std::optional<GroupBy> parse_group_by(const std::string& token);

struct ExposureRow {
  std::string group_key;
  std::int64_t image_total = 0;
  // Indexed by AdCategory.
  std::array<std::int64_t, kCategoryCount> ad_count{};
  std::array<std::int64_t, kCategoryCount> images_with{};
  // Image basis: 100 * images_with / image_total.
  std::array<double, kCategoryCount> pct_images{};
  // Ad basis: this group's share of all ads of the category.
  std::array<double, kCategoryCount> pct_ads{};
};

struct ExposureTable {
  GroupBy group_by = GroupBy::Decile;
  std::vector<ExposureRow> rows;
  std::array<std::int64_t, kCategoryCount> total_ads{};
  std::int64_t total_images = 0;
  std::vector<std::string> warnings;
};

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::string stars;
  std::vector<std::string> warnings;  // e.g. merged zero-expectation groups
};

// Significance stars: *** p<0.001, ** p<0.01, * p<0.05.
std::string stars_for(double p_value);

// ---------------------------------------------------------------------------
// Classifier evaluation report (per class + support-weighted).

struct PRF1Report {
  struct PerClass {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
  };
  std::array<PerClass, kCategoryCount> per_class{};
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  bool zero_division = false;  // some denominator hit zero and was forced to 0
};

// ---------------------------------------------------------------------------
// Manifest validation.

struct ManifestIssue {
  std::size_t index = 0;  // position in the input list
  std::string id;
  std::string field;
  std::string message;
};

// Empty report = every record valid.
std::vector<ManifestIssue> validate_manifest(const std::vector<GeoImage>& images);

// Thrown for malformed input files and CLI misuse; maps to exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace adscan

#endif  // ADSCAN_TYPES_HPP
