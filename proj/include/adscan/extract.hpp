#ifndef ADSCAN_EXTRACT_HPP
#define ADSCAN_EXTRACT_HPP

#include <optional>
#include <vector>

#include "adscan/types.hpp"

namespace adscan {
namespace extract {

struct PixelComponent {
  std::vector<PixelPoint> pixels;  // sorted by (y, x)
  BBox bbox;
  std::int64_t size() const { return static_cast<std::int64_t>(pixels.size()); }
};

struct ExtractConfig {
  int billboard_class = 1;
  std::int64_t min_pixels = 2000;  // filled-hull threshold
};

// Maximal 8-connected components of the pixels whose class equals class_id,
// two-pass labeling with union-find. Output ordered by (bbox.min_y,
// bbox.min_x), then by first pixel for exact ties.
std::vector<PixelComponent> connected_components(const LabelRaster& raster,
                                                 int class_id);

// Monotone-chain hull, counter-clockwise (positive shoelace sum), no three
// consecutive collinear vertices. Fewer than 3 distinct points or an
// all-collinear set is a degenerate hull: nullopt.
std::optional<std::vector<PixelPoint>> convex_hull(std::vector<PixelPoint> points);

// Binary mask over a width x height grid: pixel (x,y) is set iff its integer
// center lies inside or on the hull. Hull must be convex and CCW.
LabelRaster fill_polygon(const std::vector<PixelPoint>& hull, int width,
                         int height);

std::int64_t count_filled(const std::vector<PixelPoint>& hull);

// Twice the signed area of a polygon (positive = CCW in our convention).
std::int64_t shoelace2(const std::vector<PixelPoint>& poly);

struct ExtractResult {
  std::vector<AdInstance> ads;
  std::vector<std::string> warnings;  // degenerate hulls, etc.
};

// Full per-image extraction: components -> hull -> fill -> size filter.
// ad_id = "<image id>_<ordinal>" over surviving ads in component order.
ExtractResult extract_ads(const LabelRaster& raster, const GeoImage& image,
                          const ExtractConfig& cfg);

}  // namespace extract
}  // namespace adscan

#endif  // ADSCAN_EXTRACT_HPP
