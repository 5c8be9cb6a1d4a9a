#ifndef ADSCAN_REPORT_HPP
#define ADSCAN_REPORT_HPP

#include <map>
#include <string>
#include <vector>

#include "adscan/geostat.hpp"
#include "adscan/label.hpp"
#include "adscan/types.hpp"

namespace adscan {
namespace report {

// One Point Feature per ad: properties ad_id, category, area, filled_pixels;
// coordinates [lon, lat].
std::string render_geojson(const std::vector<AdInstance>& ads,
                           const std::map<std::string, std::string>& ad_to_area);
void emit_geojson(const std::vector<AdInstance>& ads,
                  const std::map<std::string, std::string>& ad_to_area,
                  const std::string& path);

struct GeoJsonAd {
  std::string ad_id;
  std::string category;
  std::string area;
  std::int64_t filled_pixels = 0;
  double lat = 0.0;
  double lon = 0.0;
};
std::vector<GeoJsonAd> parse_ads_geojson(const std::string& path);

// Grouped bar chart of per-group image percentages: fixed 960x540 canvas,
// bars ordered by group key then category, labels to 2 decimals. Pure
// function of the table, byte-identical across runs.
std::string render_svg_bars(const ExposureTable& table);
void emit_svg_bars(const ExposureTable& table, const std::string& path);

// exposure CSV: group_key,image_total,category,ad_count,images_with,
// pct_images,pct_ads (one row per group x category).
void write_exposure_csv(const ExposureTable& table, const std::string& path);
ExposureTable read_exposure_csv(const std::string& path);

// chi-square CSV rows per category: statistic and stars, Table-2 style, with
// dof and the p-value to 4 significant figures.
void write_chi_square_csv(
    const std::vector<std::pair<AdCategory, ChiSquareResult>>& results,
    const std::string& path);

void write_eval_csv(const label::Evaluation& ev, const std::string& path);
void write_confusion_csv(const label::ConfusionMatrix& cm, const std::string& path);

void write_seg_eval_csv(const std::vector<geostat::ClassIoU>& per_class,
                        double mean_iou, const geostat::DetectionCounts& counts,
                        const std::string& path);

}  // namespace report
}  // namespace adscan

#endif  // ADSCAN_REPORT_HPP
