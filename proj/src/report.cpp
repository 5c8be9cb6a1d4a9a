#include "adscan/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "adscan/csv.hpp"

namespace adscan {
namespace report {

namespace {

using ojson = nlohmann::ordered_json;

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out << content;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt4g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::string render_geojson(const std::vector<AdInstance>& ads,
                           const std::map<std::string, std::string>& ad_to_area) {
  ojson root;
  root["type"] = "FeatureCollection";
  ojson features = ojson::array();
  for (const auto& ad : ads) {
    ojson f;
    f["type"] = "Feature";
    ojson props;
    props["ad_id"] = ad.ad_id;
    props["category"] = ad.category ? category_name(*ad.category) : "";
    auto it = ad_to_area.find(ad.ad_id);
    props["area"] = it == ad_to_area.end() ? "" : it->second;
    props["filled_pixels"] = ad.filled_pixels;
    f["properties"] = std::move(props);
    ojson geom;
    geom["type"] = "Point";
    geom["coordinates"] = {ad.lon, ad.lat};  // RFC 7946 order
    f["geometry"] = std::move(geom);
    features.push_back(std::move(f));
  }
  root["features"] = std::move(features);
  return root.dump(2) + "\n";
}

void emit_geojson(const std::vector<AdInstance>& ads,
                  const std::map<std::string, std::string>& ad_to_area,
                  const std::string& path) {
  write_text(path, render_geojson(ads, ad_to_area));
}

std::vector<GeoJsonAd> parse_ads_geojson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  nlohmann::json root = nlohmann::json::parse(in, nullptr, false);
  if (root.is_discarded()) throw InputError(path + ": malformed JSON");
  if (root.value("type", "") != "FeatureCollection")
    throw InputError(path + ": not a FeatureCollection");
  std::vector<GeoJsonAd> out;
  for (const auto& f : root.at("features")) {
    GeoJsonAd ad;
    const auto& props = f.at("properties");
    ad.ad_id = props.at("ad_id").get<std::string>();
    ad.category = props.at("category").get<std::string>();
    ad.area = props.at("area").get<std::string>();
    ad.filled_pixels = props.at("filled_pixels").get<std::int64_t>();
    const auto& coords = f.at("geometry").at("coordinates");
    ad.lon = coords.at(0).get<double>();
    ad.lat = coords.at(1).get<double>();
    out.push_back(std::move(ad));
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG bar chart.

namespace {

constexpr int kCanvasW = 960;
constexpr int kCanvasH = 540;
constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 16;
constexpr int kMarginTop = 48;
constexpr int kMarginBottom = 72;

const char* kCategoryColor[kCategoryCount] = {"#e41a1c", "#377eb8", "#4daf4a",
                                              "#984ea3"};

}  // namespace

std::string render_svg_bars(const ExposureTable& table) {
  const double plot_w = kCanvasW - kMarginLeft - kMarginRight;
  const double plot_h = kCanvasH - kMarginTop - kMarginBottom;

  double max_pct = 0.0;
  for (const auto& row : table.rows)
    for (double v : row.pct_images) max_pct = std::max(max_pct, v);
  double y_max = std::max(5.0, std::ceil(max_pct / 5.0) * 5.0);

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(kCanvasW) + "\" height=\"" + std::to_string(kCanvasH) +
         "\" viewBox=\"0 0 " + std::to_string(kCanvasW) + " " +
         std::to_string(kCanvasH) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt2(kCanvasW / 2.0) +
         "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">Images containing advertisements by " +
         std::string(group_by_name(table.group_by)) + " (%)</text>\n";

  // Axes and horizontal gridlines with tick labels.
  for (int t = 0; t <= 5; ++t) {
    double val = y_max * t / 5.0;
    double y = kMarginTop + plot_h - plot_h * t / 5.0;
    svg += "<line x1=\"" + fmt2(kMarginLeft) + "\" y1=\"" + fmt2(y) + "\" x2=\"" +
           fmt2(kMarginLeft + plot_w) + "\" y2=\"" + fmt2(y) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + fmt2(kMarginLeft - 6) + "\" y=\"" + fmt2(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           fmt2(val) + "</text>\n";
  }
  svg += "<line x1=\"" + fmt2(kMarginLeft) + "\" y1=\"" + fmt2(kMarginTop) +
         "\" x2=\"" + fmt2(kMarginLeft) + "\" y2=\"" +
         fmt2(kMarginTop + plot_h) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + fmt2(kMarginLeft) + "\" y1=\"" + fmt2(kMarginTop + plot_h) +
         "\" x2=\"" + fmt2(kMarginLeft + plot_w) + "\" y2=\"" +
         fmt2(kMarginTop + plot_h) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  const std::size_t groups = table.rows.size();
  if (groups > 0) {
    const double group_w = plot_w / static_cast<double>(groups);
    const double bar_w = group_w / (kCategoryCount + 1);
    for (std::size_t gi = 0; gi < groups; ++gi) {
      const ExposureRow& row = table.rows[gi];
      double gx = kMarginLeft + group_w * static_cast<double>(gi);
      for (int c = 0; c < kCategoryCount; ++c) {
        double h = plot_h * row.pct_images[c] / y_max;
        double x = gx + bar_w * (0.5 + c);
        double y = kMarginTop + plot_h - h;
        svg += "<rect x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) + "\" width=\"" +
               fmt2(bar_w) + "\" height=\"" + fmt2(h) + "\" fill=\"" +
               kCategoryColor[c] + "\"/>\n";
        svg += "<text x=\"" + fmt2(x + bar_w / 2) + "\" y=\"" + fmt2(y - 3) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"9\">" +
               fmt2(row.pct_images[c]) + "</text>\n";
      }
      svg += "<text x=\"" + fmt2(gx + group_w / 2) + "\" y=\"" +
             fmt2(kMarginTop + plot_h + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"12\">" +
             row.group_key + "</text>\n";
    }
  }

  // Legend.
  double lx = kMarginLeft;
  double ly = kCanvasH - 28.0;
  for (int c = 0; c < kCategoryCount; ++c) {
    svg += "<rect x=\"" + fmt2(lx) + "\" y=\"" + fmt2(ly - 10) +
           "\" width=\"12\" height=\"12\" fill=\"" + kCategoryColor[c] + "\"/>\n";
    svg += "<text x=\"" + fmt2(lx + 16) + "\" y=\"" + fmt2(ly) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" +
           category_name(kAllCategories[c]) + "</text>\n";
    lx += 110;
  }
  svg += "</svg>\n";
  return svg;
}

void emit_svg_bars(const ExposureTable& table, const std::string& path) {
  write_text(path, render_svg_bars(table));
}

// ---------------------------------------------------------------------------
// CSV reports.

void write_exposure_csv(const ExposureTable& table, const std::string& path) {
  csv::Table t;
  t.header = {"group_key", "image_total", "category",  "ad_count",
              "images_with", "pct_images", "pct_ads"};
  for (const auto& row : table.rows)
    for (int c = 0; c < kCategoryCount; ++c)
      t.rows.push_back({row.group_key, std::to_string(row.image_total),
                        category_name(kAllCategories[c]),
                        std::to_string(row.ad_count[c]),
                        std::to_string(row.images_with[c]),
                        csv::format_double(row.pct_images[c]),
                        csv::format_double(row.pct_ads[c])});
  csv::write_file(path, t);
}

ExposureTable read_exposure_csv(const std::string& path) {
  csv::Table t = csv::read_file(path);
  if (t.header != std::vector<std::string>{"group_key", "image_total", "category",
                                           "ad_count", "images_with",
                                           "pct_images", "pct_ads"})
    throw InputError(path + ": unexpected exposure CSV header");
  ExposureTable table;
  std::map<std::string, std::size_t> row_index;
  for (const auto& row : t.rows) {
    if (row.size() != 7)
      throw InputError(path + ": expected 7 fields per exposure row");
    auto cat = parse_category(row[2]);
    if (!cat) throw InputError(path + ": unknown category " + row[2]);
    auto [it, inserted] = row_index.emplace(row[0], table.rows.size());
    if (inserted) {
      ExposureRow r;
      r.group_key = row[0];
      r.image_total = std::stoll(row[1]);
      table.rows.push_back(r);
      table.total_images += r.image_total;
    }
    ExposureRow& r = table.rows[it->second];
    int c = static_cast<int>(*cat);
    r.ad_count[c] = std::stoll(row[3]);
    r.images_with[c] = std::stoll(row[4]);
    r.pct_images[c] = std::stod(row[5]);
    r.pct_ads[c] = std::stod(row[6]);
    table.total_ads[c] += r.ad_count[c];
  }
  return table;
}

void write_chi_square_csv(
    const std::vector<std::pair<AdCategory, ChiSquareResult>>& results,
    const std::string& path) {
  csv::Table t;
  t.header = {"category", "statistic", "dof", "p_value", "stars"};
  for (const auto& [cat, r] : results)
    t.rows.push_back({category_name(cat), csv::format_double(r.statistic),
                      std::to_string(r.dof), fmt4g(r.p_value), r.stars});
  csv::write_file(path, t);
}

void write_eval_csv(const label::Evaluation& ev, const std::string& path) {
  csv::Table t;
  t.header = {"category", "precision", "recall", "f1", "support"};
  for (int c = 0; c < kCategoryCount; ++c) {
    const auto& pc = ev.report.per_class[c];
    t.rows.push_back({category_name(kAllCategories[c]),
                      csv::format_double(pc.precision),
                      csv::format_double(pc.recall), csv::format_double(pc.f1),
                      std::to_string(pc.support)});
  }
  std::int64_t total = 0;
  for (const auto& pc : ev.report.per_class) total += pc.support;
  t.rows.push_back({"weighted", csv::format_double(ev.report.weighted_precision),
                    csv::format_double(ev.report.weighted_recall),
                    csv::format_double(ev.report.weighted_f1),
                    std::to_string(total)});
  csv::write_file(path, t);
}

void write_confusion_csv(const label::ConfusionMatrix& cm, const std::string& path) {
  csv::Table t;
  t.header = {"truth\\prediction"};
  for (auto c : kAllCategories) t.header.push_back(category_name(c));
  for (int r = 0; r < kCategoryCount; ++r) {
    std::vector<std::string> row{category_name(kAllCategories[r])};
    for (int c = 0; c < kCategoryCount; ++c)
      row.push_back(std::to_string(cm.counts[r][c]));
    t.rows.push_back(std::move(row));
  }
  csv::write_file(path, t);
}

void write_seg_eval_csv(const std::vector<geostat::ClassIoU>& per_class,
                        double mean_iou, const geostat::DetectionCounts& counts,
                        const std::string& path) {
  csv::Table t;
  t.header = {"metric", "class", "value"};
  for (const auto& c : per_class)
    t.rows.push_back({"iou", std::to_string(c.class_id),
                      csv::format_double(c.iou)});
  t.rows.push_back({"mean_iou", "", csv::format_double(mean_iou)});
  t.rows.push_back({"matched", "", std::to_string(counts.matched)});
  t.rows.push_back({"false_positives", "", std::to_string(counts.false_positives)});
  t.rows.push_back({"missed", "", std::to_string(counts.missed)});
  csv::write_file(path, t);
}

}  // namespace report
}  // namespace adscan
