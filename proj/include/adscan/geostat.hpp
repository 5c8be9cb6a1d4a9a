#ifndef ADSCAN_GEOSTAT_HPP
#define ADSCAN_GEOSTAT_HPP

#include <map>
#include <string>
#include <vector>

#include "adscan/types.hpp"

namespace adscan {
namespace geostat {

// Even-odd ray casting over all rings (outer minus holes); points exactly on
// any ring edge count as inside.
bool point_in_polygon(const LatLon& pt, const PolygonRings& poly);
bool point_in_area(const LatLon& pt, const AreaUnit& area);

struct JoinResult {
  std::map<std::string, std::string> ad_to_area;     // assigned ads only
  std::map<std::string, std::string> image_to_area;  // assigned images only
  std::vector<std::string> unassigned_ads;
  std::vector<std::string> unassigned_images;
  std::vector<std::string> warnings;  // overlapping areas etc.
};

// First containing polygon (file order) wins; containment in more than one
// area produces an overlap warning naming the codes. Lookups go through a
// bounding-box grid over the area extents.
JoinResult join_ads_to_areas(const std::vector<AdInstance>& ads,
                             const std::vector<GeoImage>& images,
                             const std::vector<AreaUnit>& areas);

// Per-group image totals, per-category ad counts, images-with counts and
// percentages on both the image basis (share of the group's images containing
// the category) and the ad basis (the group's share of the category's ads).
// Groups with zero images are excluded with a warning.
ExposureTable exposure_table(const std::vector<GeoImage>& images,
                             const std::vector<AdInstance>& ads,
                             const JoinResult& join,
                             const std::vector<AreaUnit>& areas,
                             GroupBy group_by);

struct ChiSquareGroup {
  std::string group_key;
  std::int64_t image_total = 0;
  std::int64_t category_count = 0;
};

struct ChiSquareInput {
  std::vector<ChiSquareGroup> groups;
};

// Pearson goodness-of-fit with expected counts proportional to per-group
// image totals; dof = groups - 1 after merging zero-expectation groups into
// their smallest neighbour.
ChiSquareResult chi_squared(const ChiSquareInput& input);

// Upper-tail chi-square probability Q(dof/2, x/2) via the regularized
// incomplete gamma function (series for x < dof/2 + 1, continued fraction
// otherwise).
double chi2_p_value(double statistic, int dof);

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

struct IouResult {
  double value = 0.0;
  bool both_empty = false;  // defined as 1.0 in that case
};

// Masks are nonzero-vs-zero; dimensions must match.
IouResult iou(const LabelRaster& a, const LabelRaster& b);

struct ClassIoU {
  int class_id = 0;
  double iou = 0.0;
  bool in_gt = false;
  bool both_empty = false;
};

// Per-class IoU between two label rasters for every class id present in
// either, and the mean over classes present in the ground truth.
std::vector<ClassIoU> per_class_iou(const LabelRaster& gt, const LabelRaster& pred);
double mean_iou(const std::vector<ClassIoU>& per_class);

struct DetectionCounts {
  int matched = 0;
  int false_positives = 0;
  int missed = 0;
};

// Greedy one-to-one matching by descending pairwise mask IoU; pairs at or
// above iou_match count as matched. Ground-truth masks under min_px are
// dropped first.
DetectionCounts detection_counts(const std::vector<LabelRaster>& pred_masks,
                                 const std::vector<LabelRaster>& gt_masks,
                                 std::int64_t min_px, double iou_match = 0.5);

}  // namespace geostat
}  // namespace adscan

#endif  // ADSCAN_GEOSTAT_HPP
