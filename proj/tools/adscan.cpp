// adscan: batch pipeline for extracting, deduplicating, labeling and
// analyzing advertisements in segmentation-labeled street-level imagery.
//
// Stages communicate through files in a run directory so the segmentation
// and classification models stay external and replaceable.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "adscan/csv.hpp"
#include "adscan/dedup.hpp"
#include "adscan/extract.hpp"
#include "adscan/geostat.hpp"
#include "adscan/ingest.hpp"
#include "adscan/label.hpp"
#include "adscan/raster_io.hpp"
#include "adscan/rectify.hpp"
#include "adscan/report.hpp"
#include "adscan/runmeta.hpp"
#include "adscan/serial.hpp"
#include "adscan/synth.hpp"
#include "adscan/types.hpp"

namespace fs = std::filesystem;
using namespace adscan;
using ojson = nlohmann::ordered_json;

namespace {

std::string now_utc() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string resolve_relative(const std::string& base_file, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(base_file).parent_path() / p).string();
}

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

void require_out(std::string& out) {
  if (!out.empty()) return;
  const char* env = std::getenv("ADSCAN_OUT");
  if (env && *env) {
    out = env;
    return;
  }
  throw InputError("no output directory: pass --out or set ADSCAN_OUT");
}

LabelRaster load_crop_gray(const std::string& path) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".ppm")
    return raster_io::to_gray(raster_io::load_ppm(path));
  return raster_io::load_pgm(path);
}

// ---------------------------------------------------------------------------
// Stage implementations.

int run_synth(const std::string& spec_path, std::string out) {
  require_out(out);
  fs::create_directories(out);
  synth::SynthSpec spec = synth::parse_spec(spec_path);
  synth::Scene scene = synth::generate_scene(spec);
  synth::write_scene(scene, spec, out);

  runmeta::StageRecord rec;
  rec.stage = "synth";
  rec.timestamp = now_utc();
  rec.inputs["spec"] = spec_path;
  rec.config["seed"] = spec.seed;
  rec.config["frames"] = spec.frames;
  rec.config["ads"] = spec.ads.size();
  rec.counts["frames"] = spec.frames;
  rec.counts["planted_regions"] = static_cast<std::int64_t>(scene.regions.size());
  runmeta::append_stage(out, rec);
  std::cout << "synth: " << spec.frames << " frames, " << scene.regions.size()
            << " planted regions -> " << out << "\n";
  return 0;
}

int run_extract(const std::string& manifest_path, int billboard_class,
                std::int64_t min_pixels, bool write_masks, std::string out) {
  require_out(out);
  fs::create_directories(out);
  auto images = ingest::load_manifest(manifest_path);

  extract::ExtractConfig cfg;
  cfg.billboard_class = billboard_class;
  cfg.min_pixels = min_pixels;

  std::vector<AdInstance> all_ads;
  std::int64_t warnings = 0;
  for (const auto& im : images) {
    LabelRaster raster =
        raster_io::load_pgm(resolve_relative(manifest_path, im.raster_ref));
    auto result = extract::extract_ads(raster, im, cfg);
    warn(result.warnings);
    warnings += static_cast<std::int64_t>(result.warnings.size());
    if (write_masks) {
      fs::create_directories(fs::path(out) / "masks");
      for (const auto& ad : result.ads) {
        LabelRaster mask =
            extract::fill_polygon(ad.hull, raster.width, raster.height);
        for (auto& px : mask.pixels) px = px ? 255 : 0;
        raster_io::write_pgm(mask,
                             (fs::path(out) / "masks" / (ad.ad_id + ".pgm")).string());
      }
    }
    all_ads.insert(all_ads.end(), result.ads.begin(), result.ads.end());
  }
  serial::write_ads_jsonl(all_ads, (fs::path(out) / "ads.jsonl").string());

  runmeta::StageRecord rec;
  rec.stage = "extract";
  rec.timestamp = now_utc();
  rec.inputs["manifest"] = manifest_path;
  rec.config["billboard_class"] = billboard_class;
  rec.config["min_pixels"] = min_pixels;
  rec.config["masks"] = write_masks;
  rec.counts["images"] = static_cast<std::int64_t>(images.size());
  rec.counts["ads"] = static_cast<std::int64_t>(all_ads.size());
  rec.counts["warnings"] = warnings;
  runmeta::append_stage(out, rec);
  std::cout << "extract: " << all_ads.size() << " ads from " << images.size()
            << " images -> " << out << "/ads.jsonl\n";
  return 0;
}

int run_rectify(const std::string& manifest_path, const std::string& ads_path,
                int crop_size, std::string out) {
  require_out(out);
  fs::create_directories(fs::path(out) / "crops");
  auto images = ingest::load_manifest(manifest_path);
  auto ads = serial::load_ads_jsonl(ads_path);

  std::map<std::string, const GeoImage*> by_id;
  for (const auto& im : images) by_id[im.id] = &im;

  std::map<std::string, LabelRaster> gray_cache;
  std::map<std::string, RgbRaster> rgb_cache;
  std::int64_t cropped = 0, skipped = 0;
  for (auto& ad : ads) {
    auto im_it = by_id.find(ad.source_image);
    if (im_it == by_id.end())
      throw InputError("ad " + ad.ad_id + " references unknown image " +
                       ad.source_image);
    const GeoImage& im = *im_it->second;
    if (im.image_ref.empty()) {
      std::cerr << "warning: image " << im.id
                << " has no photo; ad " << ad.ad_id << " not rectified\n";
      ++skipped;
      continue;
    }
    auto quad = rectify::fit_quad(ad.hull);
    auto h = quad ? rectify::homography_from_quad(*quad, crop_size, crop_size)
                  : std::nullopt;
    if (!h) {
      std::cerr << "warning: degenerate quad for ad " << ad.ad_id
                << "; not rectified\n";
      ++skipped;
      continue;
    }
    std::string photo_path = resolve_relative(manifest_path, im.image_ref);
    bool color = photo_path.size() > 4 &&
                 photo_path.substr(photo_path.size() - 4) == ".ppm";
    std::string crop_rel;
    if (color) {
      auto [it, fresh] = rgb_cache.try_emplace(photo_path);
      if (fresh) it->second = raster_io::load_ppm(photo_path);
      RgbRaster crop = rectify::warp(it->second, *h, crop_size, crop_size);
      crop_rel = "crops/" + ad.ad_id + ".ppm";
      raster_io::write_ppm(crop, (fs::path(out) / crop_rel).string());
    } else {
      auto [it, fresh] = gray_cache.try_emplace(photo_path);
      if (fresh) it->second = raster_io::load_pgm(photo_path);
      LabelRaster crop = rectify::warp(it->second, *h, crop_size, crop_size);
      crop_rel = "crops/" + ad.ad_id + ".pgm";
      raster_io::write_pgm(crop, (fs::path(out) / crop_rel).string());
    }
    ad.crop_ref = crop_rel;
    ++cropped;
  }
  serial::write_ads_jsonl(ads, (fs::path(out) / "rectified.jsonl").string());

  runmeta::StageRecord rec;
  rec.stage = "rectify";
  rec.timestamp = now_utc();
  rec.inputs["manifest"] = manifest_path;
  rec.inputs["ads"] = ads_path;
  rec.config["crop_size"] = crop_size;
  rec.counts["ads"] = static_cast<std::int64_t>(ads.size());
  rec.counts["cropped"] = cropped;
  rec.counts["skipped"] = skipped;
  runmeta::append_stage(out, rec);
  std::cout << "rectify: " << cropped << "/" << ads.size() << " crops -> " << out
            << "/rectified.jsonl\n";
  return 0;
}

int run_dedup(const std::string& ads_path, int tau, double distance, double ratio,
              bool strict_tau, const std::string& descriptor_dir,
              bool export_descriptors, std::string out) {
  require_out(out);
  fs::create_directories(out);
  auto ads = serial::load_ads_jsonl(ads_path);

  std::map<std::string, dedup::DescriptorSet> descriptors;
  std::int64_t from_sidecar = 0, computed = 0, empty = 0;
  for (const auto& ad : ads) {
    dedup::DescriptorSet set;
    std::string sidecar = descriptor_dir.empty()
                              ? ""
                              : (fs::path(descriptor_dir) / (ad.ad_id + ".desc")).string();
    if (!sidecar.empty() && fs::exists(sidecar)) {
      set = dedup::read_descriptors(sidecar);
      ++from_sidecar;
    } else if (!ad.crop_ref.empty()) {
      set = dedup::compute_descriptors(
          load_crop_gray(resolve_relative(ads_path, ad.crop_ref)));
      ++computed;
    } else {
      std::cerr << "warning: ad " << ad.ad_id
                << " has no crop or sidecar descriptors; treated as isolated\n";
      ++empty;
    }
    descriptors.emplace(ad.ad_id, std::move(set));
  }

  if (export_descriptors) {
    fs::create_directories(fs::path(out) / "descriptors");
    for (const auto& [id, set] : descriptors)
      dedup::write_descriptors(
          set, (fs::path(out) / "descriptors" / (id + ".desc")).string());
  }

  DedupConfig cfg;
  cfg.tau = tau;
  cfg.distance_m = distance;
  cfg.ratio = ratio;
  cfg.strict_tau = strict_tau;
  auto graph = dedup::build_dedup_graph(ads, descriptors, cfg);
  auto survivors = dedup::select_representatives(graph, ads);
  auto duplicates = dedup::duplicate_mapping(graph, ads);

  serial::write_ads_jsonl(survivors, (fs::path(out) / "survivors.jsonl").string());
  csv::Table dup;
  dup.header = {"discarded_ad_id", "representative_ad_id"};
  for (const auto& [d, r] : duplicates) dup.rows.push_back({d, r});
  csv::write_file((fs::path(out) / "duplicates.csv").string(), dup);

  // Residual duplication is not quantifiable without ground truth, so report
  // the component-size histogram instead.
  std::map<std::size_t, std::int64_t> histogram;
  for (const auto& comp : graph.components) histogram[comp.size()]++;

  runmeta::StageRecord rec;
  rec.stage = "dedup";
  rec.timestamp = now_utc();
  rec.inputs["ads"] = ads_path;
  rec.config["tau"] = tau;
  rec.config["distance_m"] = distance;
  rec.config["ratio"] = ratio;
  rec.config["strict_tau"] = strict_tau;
  rec.counts["ads"] = static_cast<std::int64_t>(ads.size());
  rec.counts["edges"] = static_cast<std::int64_t>(graph.edges.size());
  rec.counts["components"] = static_cast<std::int64_t>(graph.components.size());
  rec.counts["survivors"] = static_cast<std::int64_t>(survivors.size());
  rec.counts["descriptors_sidecar"] = from_sidecar;
  rec.counts["descriptors_computed"] = computed;
  rec.counts["descriptors_empty"] = empty;
  for (const auto& [size, n] : histogram)
    rec.counts["component_size_" + std::to_string(size)] = n;
  runmeta::append_stage(out, rec);
  std::cout << "dedup: " << ads.size() << " ads -> " << survivors.size()
            << " survivors (" << graph.edges.size() << " edges) -> " << out
            << "/survivors.jsonl\n";
  return 0;
}

int run_label(const std::string& ads_path, const std::string& predictions_path,
              const std::string& texts_path, const std::string& lexicon_dir,
              std::string out) {
  require_out(out);
  fs::create_directories(out);
  auto ads = serial::load_ads_jsonl(ads_path);

  label::LabelStats stats;
  std::string source;
  if (!predictions_path.empty()) {
    if (!texts_path.empty() || !lexicon_dir.empty())
      throw InputError("choose either --predictions or --texts/--lexicons");
    stats = label::apply_predictions(ads, ingest::load_predictions(predictions_path));
    source = "predictions";
  } else if (!texts_path.empty() && !lexicon_dir.empty()) {
    stats = label::apply_keyword_labels(ads, ingest::load_texts(texts_path),
                                        ingest::load_lexicons(lexicon_dir));
    source = "keywords";
  } else {
    throw InputError("label needs --predictions or both --texts and --lexicons");
  }
  warn(stats.warnings);
  serial::write_ads_jsonl(ads, (fs::path(out) / "labeled.jsonl").string());

  std::array<std::int64_t, kCategoryCount> per_cat{};
  for (const auto& ad : ads)
    if (ad.category) per_cat[static_cast<int>(*ad.category)]++;

  runmeta::StageRecord rec;
  rec.stage = "label";
  rec.timestamp = now_utc();
  rec.inputs["ads"] = ads_path;
  if (!predictions_path.empty()) rec.inputs["predictions"] = predictions_path;
  if (!texts_path.empty()) rec.inputs["texts"] = texts_path;
  if (!lexicon_dir.empty()) rec.inputs["lexicons"] = lexicon_dir;
  rec.config["source"] = source;
  rec.counts["ads"] = static_cast<std::int64_t>(ads.size());
  rec.counts["labeled"] = stats.labeled;
  rec.counts["defaulted"] = stats.defaulted;
  for (auto c : kAllCategories)
    rec.counts[category_name(c)] = per_cat[static_cast<int>(c)];
  runmeta::append_stage(out, rec);
  std::cout << "label: " << stats.labeled << " labeled, " << stats.defaulted
            << " defaulted -> " << out << "/labeled.jsonl\n";
  return 0;
}

void write_assignment_csv(const std::map<std::string, std::string>& assignment,
                          const std::map<std::string, const AreaUnit*>& area_by_code,
                          const std::string& id_column, const std::string& path) {
  csv::Table t;
  t.header = {id_column, "area_code", "imd_decile", "oac_supergroup", "oac_group"};
  for (const auto& [id, code] : assignment) {
    const AreaUnit* area = area_by_code.at(code);
    t.rows.push_back({id, code, std::to_string(area->imd_decile),
                      std::to_string(area->oac_supergroup), area->oac_group});
  }
  csv::write_file(path, t);
}

int run_join(const std::string& ads_path, const std::string& manifest_path,
             const std::string& areas_path, std::string out) {
  require_out(out);
  fs::create_directories(out);
  auto ads = serial::load_ads_jsonl(ads_path);
  auto images = ingest::load_manifest(manifest_path);
  auto areas = ingest::load_areas(areas_path);

  auto join = geostat::join_ads_to_areas(ads, images, areas);
  warn(join.warnings);

  std::map<std::string, const AreaUnit*> by_code;
  for (const auto& a : areas) by_code.emplace(a.code, &a);
  write_assignment_csv(join.ad_to_area, by_code, "ad_id",
                       (fs::path(out) / "assignments.csv").string());
  write_assignment_csv(join.image_to_area, by_code, "image_id",
                       (fs::path(out) / "image_assignments.csv").string());

  runmeta::StageRecord rec;
  rec.stage = "join";
  rec.timestamp = now_utc();
  rec.inputs["ads"] = ads_path;
  rec.inputs["manifest"] = manifest_path;
  rec.inputs["areas"] = areas_path;
  rec.config["areas"] = static_cast<std::int64_t>(areas.size());
  rec.counts["ads_assigned"] = static_cast<std::int64_t>(join.ad_to_area.size());
  rec.counts["ads_unassigned"] = static_cast<std::int64_t>(join.unassigned_ads.size());
  rec.counts["images_assigned"] =
      static_cast<std::int64_t>(join.image_to_area.size());
  rec.counts["images_unassigned"] =
      static_cast<std::int64_t>(join.unassigned_images.size());
  runmeta::append_stage(out, rec);
  std::cout << "join: " << join.ad_to_area.size() << " ads, "
            << join.image_to_area.size() << " images assigned -> " << out
            << "/assignments.csv\n";
  return 0;
}

// Rebuilds the join view from the assignment CSVs so analyze needs no
// geometry input.
struct JoinView {
  geostat::JoinResult join;
  std::vector<AreaUnit> areas;  // metadata only, no polygons
};

JoinView load_join_view(const std::string& out) {
  JoinView view;
  std::set<std::string> seen_codes;
  auto load = [&](const std::string& file, const std::string& id_col,
                  std::map<std::string, std::string>& target) {
    std::string path = (fs::path(out) / file).string();
    if (!fs::exists(path))
      throw InputError("join required before analyze (missing " + file + ")");
    csv::Table t = csv::read_file(path);
    if (t.header != std::vector<std::string>{id_col, "area_code", "imd_decile",
                                             "oac_supergroup", "oac_group"})
      throw InputError(path + ": unexpected header");
    for (const auto& row : t.rows) {
      target[row[0]] = row[1];
      if (seen_codes.insert(row[1]).second) {
        AreaUnit a;
        a.code = row[1];
        a.imd_decile = std::stoi(row[2]);
        a.oac_supergroup = std::stoi(row[3]);
        a.oac_group = row[4];
        view.areas.push_back(std::move(a));
      }
    }
  };
  load("assignments.csv", "ad_id", view.join.ad_to_area);
  load("image_assignments.csv", "image_id", view.join.image_to_area);
  return view;
}

int run_analyze(const std::string& manifest_path, const std::string& group_by_token,
                bool force, std::string out) {
  require_out(out);
  if (auto err = runmeta::verify_chain(out)) {
    if (!force) throw InputError("run manifest: " + *err + " (use --force to override)");
    std::cerr << "warning: " << *err << " (continuing under --force)\n";
  }
  JoinView view = load_join_view(out);
  std::string labeled = (fs::path(out) / "labeled.jsonl").string();
  if (!fs::exists(labeled))
    throw InputError("label required before analyze (missing labeled.jsonl)");
  auto ads = serial::load_ads_jsonl(labeled);
  auto images = ingest::load_manifest(manifest_path);

  std::vector<GroupBy> groupings;
  if (group_by_token == "all") {
    groupings = {GroupBy::Decile, GroupBy::Supergroup, GroupBy::Group};
  } else {
    auto g = parse_group_by(group_by_token);
    if (!g) throw InputError("unknown --group-by " + group_by_token);
    groupings = {*g};
  }

  for (GroupBy g : groupings) {
    ExposureTable table =
        geostat::exposure_table(images, ads, view.join, view.areas, g);
    warn(table.warnings);
    std::string gname = group_by_name(g);
    report::write_exposure_csv(table,
                               (fs::path(out) / ("exposure_" + gname + ".csv")).string());

    std::vector<std::pair<AdCategory, ChiSquareResult>> chi;
    if (table.rows.size() < 2) {
      std::cerr << "warning: fewer than 2 " << gname
                << " groups; chi-squared skipped\n";
    } else {
      for (AdCategory cat : kAllCategories) {
        int c = static_cast<int>(cat);
        if (table.total_ads[c] < 1) {
          std::cerr << "warning: no " << category_name(cat)
                    << " ads; chi-squared skipped for " << gname << "\n";
          continue;
        }
        geostat::ChiSquareInput input;
        for (const auto& row : table.rows)
          input.groups.push_back({row.group_key, row.image_total, row.ad_count[c]});
        ChiSquareResult r = geostat::chi_squared(input);
        warn(r.warnings);
        chi.emplace_back(cat, r);
      }
    }
    report::write_chi_square_csv(
        chi, (fs::path(out) / ("chi_square_" + gname + ".csv")).string());

    runmeta::StageRecord rec;
    rec.stage = "analyze";
    rec.timestamp = now_utc();
    rec.inputs["labeled"] = labeled;
    rec.inputs["manifest"] = manifest_path;
    rec.config["group_by"] = gname;
    rec.counts["groups"] = static_cast<std::int64_t>(table.rows.size());
    rec.counts["images"] = table.total_images;
    runmeta::append_stage(out, rec);
    std::cout << "analyze: " << table.rows.size() << " " << gname
              << " groups -> " << out << "/exposure_" << gname << ".csv\n";
  }
  return 0;
}

int run_report(std::string out) {
  require_out(out);
  std::string labeled = (fs::path(out) / "labeled.jsonl").string();
  if (!fs::exists(labeled))
    throw InputError("label required before report (missing labeled.jsonl)");
  auto ads = serial::load_ads_jsonl(labeled);
  JoinView view = load_join_view(out);

  report::emit_geojson(ads, view.join.ad_to_area,
                       (fs::path(out) / "ads.geojson").string());
  int charts = 0;
  for (const char* gname : {"decile", "supergroup", "group"}) {
    std::string csv_path = (fs::path(out) / ("exposure_" + std::string(gname) +
                                             ".csv")).string();
    if (!fs::exists(csv_path)) continue;
    ExposureTable table = report::read_exposure_csv(csv_path);
    table.group_by = *parse_group_by(gname);
    report::emit_svg_bars(table, (fs::path(out) / ("exposure_" + std::string(gname) +
                                                   ".svg")).string());
    ++charts;
  }

  runmeta::StageRecord rec;
  rec.stage = "report";
  rec.timestamp = now_utc();
  rec.inputs["labeled"] = labeled;
  rec.config["charts"] = charts;
  rec.counts["ads"] = static_cast<std::int64_t>(ads.size());
  rec.counts["charts"] = charts;
  runmeta::append_stage(out, rec);
  std::cout << "report: " << ads.size() << " ads -> " << out << "/ads.geojson, "
            << charts << " charts\n";
  return 0;
}

int run_eval(const std::string& preds_path, const std::string& truth_path,
             int subsets, std::uint64_t seed, const std::string& gt_raster,
             const std::string& pred_raster, int billboard_class,
             std::int64_t min_pixels, double iou_match, std::string out) {
  require_out(out);
  fs::create_directories(out);
  bool did_any = false;

  if (!preds_path.empty() || !truth_path.empty()) {
    if (preds_path.empty() || truth_path.empty())
      throw InputError("classification eval needs both --preds and --truth");
    auto preds = ingest::load_predictions(preds_path);
    auto truth = ingest::load_predictions(truth_path);
    label::Evaluation ev = subsets > 0
                               ? label::evaluate_subsets(preds, truth, subsets, seed)
                               : label::evaluate(preds, truth);
    report::write_eval_csv(ev, (fs::path(out) / "eval_report.csv").string());
    report::write_confusion_csv(ev.confusion,
                                (fs::path(out) / "confusion.csv").string());
    std::cout << "eval: weighted P/R/F1 = " << ev.report.weighted_precision << "/"
              << ev.report.weighted_recall << "/" << ev.report.weighted_f1
              << " -> " << out << "/eval_report.csv\n";
    did_any = true;
  }

  if (!gt_raster.empty() || !pred_raster.empty()) {
    if (gt_raster.empty() || pred_raster.empty())
      throw InputError("segmentation eval needs both --gt-raster and --pred-raster");
    LabelRaster gt = raster_io::load_pgm(gt_raster);
    LabelRaster pred = raster_io::load_pgm(pred_raster);
    auto per_class = geostat::per_class_iou(gt, pred);
    double miou = geostat::mean_iou(per_class);

    GeoImage dummy;
    dummy.id = "eval";
    dummy.width = gt.width;
    dummy.height = gt.height;
    dummy.raster_ref = gt_raster;
    extract::ExtractConfig cfg;
    cfg.billboard_class = billboard_class;
    cfg.min_pixels = min_pixels;
    auto gt_ads = extract::extract_ads(gt, dummy, cfg);
    auto pred_ads = extract::extract_ads(pred, dummy, cfg);
    auto masks = [&](const std::vector<AdInstance>& ads) {
      std::vector<LabelRaster> out_masks;
      for (const auto& ad : ads)
        out_masks.push_back(extract::fill_polygon(ad.hull, gt.width, gt.height));
      return out_masks;
    };
    auto counts = geostat::detection_counts(masks(pred_ads.ads), masks(gt_ads.ads),
                                            min_pixels, iou_match);
    report::write_seg_eval_csv(per_class, miou, counts,
                               (fs::path(out) / "seg_eval.csv").string());
    std::cout << "eval: mIoU " << miou << ", matched " << counts.matched << ", fp "
              << counts.false_positives << ", missed " << counts.missed << " -> "
              << out << "/seg_eval.csv\n";
    did_any = true;
  }

  if (!did_any)
    throw InputError("eval needs --preds/--truth and/or --gt-raster/--pred-raster");

  runmeta::StageRecord rec;
  rec.stage = "eval";
  rec.timestamp = now_utc();
  if (!preds_path.empty()) rec.inputs["preds"] = preds_path;
  if (!truth_path.empty()) rec.inputs["truth"] = truth_path;
  if (!gt_raster.empty()) rec.inputs["gt_raster"] = gt_raster;
  if (!pred_raster.empty()) rec.inputs["pred_raster"] = pred_raster;
  rec.config["subsets"] = subsets;
  rec.config["iou_match"] = iou_match;
  runmeta::append_stage(out, rec);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adscan: advertisement extraction and exposure analysis over "
               "labeled street-level imagery"};
  app.require_subcommand(1);

  std::string out;

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic labeled scene");
  std::string spec_path;
  synth_cmd->add_option("--spec", spec_path, "scene spec JSON")->required();
  synth_cmd->add_option("--out", out, "output directory");

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "extract ads from label rasters");
  std::string manifest_path;
  int billboard_class = 1;
  std::int64_t min_pixels = 2000;
  bool write_masks = false;
  extract_cmd->add_option("--manifest", manifest_path, "JSONL image manifest")->required();
  extract_cmd->add_option("--billboard-class", billboard_class, "label raster class id");
  extract_cmd->add_option("--min-pixels", min_pixels, "filled-hull pixel threshold");
  extract_cmd->add_flag("--masks", write_masks, "write per-ad binary masks");
  extract_cmd->add_option("--out", out, "output directory");

  // rectify
  auto* rectify_cmd = app.add_subcommand("rectify", "warp ad crops to a frontal view");
  std::string ads_path;
  int crop_size = 224;
  rectify_cmd->add_option("--manifest", manifest_path, "JSONL image manifest")->required();
  rectify_cmd->add_option("--ads", ads_path, "ads JSONL from extract")->required();
  rectify_cmd->add_option("--crop-size", crop_size, "rectified crop size in pixels");
  rectify_cmd->add_option("--out", out, "output directory");

  // dedup
  auto* dedup_cmd = app.add_subcommand("dedup", "collapse duplicate recordings");
  int tau = 60;
  double distance = 10.0;
  double ratio = 0.75;
  bool strict_tau = false;
  std::string descriptor_dir;
  bool export_descriptors = false;
  dedup_cmd->add_option("--ads", ads_path, "ads JSONL (rectified)")->required();
  dedup_cmd->add_option("--tau", tau, "minimum matching-feature count");
  dedup_cmd->add_option("--distance", distance, "pairing distance gate in meters");
  dedup_cmd->add_option("--ratio", ratio, "nearest-neighbour ratio threshold");
  dedup_cmd->add_flag("--strict-tau", strict_tau, "require matches > tau instead of >=");
  dedup_cmd->add_option("--descriptors", descriptor_dir,
                        "sidecar directory with <ad_id>.desc files");
  dedup_cmd->add_flag("--export-descriptors", export_descriptors,
                      "write computed descriptors as sidecars");
  dedup_cmd->add_option("--out", out, "output directory");

  // label
  auto* label_cmd = app.add_subcommand("label", "assign content categories");
  std::string predictions_path, texts_path, lexicon_dir;
  label_cmd->add_option("--ads", ads_path, "ads JSONL")->required();
  label_cmd->add_option("--predictions", predictions_path, "classifier predictions CSV");
  label_cmd->add_option("--texts", texts_path, "OCR texts CSV");
  label_cmd->add_option("--lexicons", lexicon_dir, "keyword lexicon directory");
  label_cmd->add_option("--out", out, "output directory");

  // join
  auto* join_cmd = app.add_subcommand("join", "assign ads and images to area polygons");
  std::string areas_path;
  join_cmd->add_option("--ads", ads_path, "labeled ads JSONL")->required();
  join_cmd->add_option("--manifest", manifest_path, "JSONL image manifest")->required();
  join_cmd->add_option("--areas", areas_path, "GeoJSON area polygons")->required();
  join_cmd->add_option("--out", out, "output directory");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "exposure tables and chi-squared tests");
  std::string group_by_token = "all";
  bool force = false;
  analyze_cmd->add_option("--manifest", manifest_path, "JSONL image manifest")->required();
  analyze_cmd->add_option("--group-by", group_by_token,
                          "decile, supergroup, group or all");
  analyze_cmd->add_flag("--force", force, "ignore run-manifest chain mismatches");
  analyze_cmd->add_option("--out", out, "output directory");

  // report
  auto* report_cmd = app.add_subcommand("report", "emit GeoJSON and SVG charts");
  report_cmd->add_option("--out", out, "run directory");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate classifications or segmentations");
  std::string preds_path, truth_path, gt_raster, pred_raster;
  int subsets = 0;
  std::uint64_t seed = 1;
  double iou_match = 0.5;
  eval_cmd->add_option("--preds", preds_path, "predictions CSV");
  eval_cmd->add_option("--truth", truth_path, "ground-truth CSV");
  eval_cmd->add_option("--subsets", subsets,
                       "balanced-subset repetitions (0 = single pass)");
  eval_cmd->add_option("--seed", seed, "subset sampling seed");
  eval_cmd->add_option("--gt-raster", gt_raster, "ground-truth label raster (PGM)");
  eval_cmd->add_option("--pred-raster", pred_raster, "predicted label raster (PGM)");
  eval_cmd->add_option("--billboard-class", billboard_class, "label raster class id");
  eval_cmd->add_option("--min-pixels", min_pixels, "detection size threshold");
  eval_cmd->add_option("--iou-match", iou_match, "detection IoU threshold");
  eval_cmd->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (synth_cmd->parsed())
      return run_synth(spec_path, out);
    if (extract_cmd->parsed())
      return run_extract(manifest_path, billboard_class, min_pixels, write_masks, out);
    if (rectify_cmd->parsed())
      return run_rectify(manifest_path, ads_path, crop_size, out);
    if (dedup_cmd->parsed())
      return run_dedup(ads_path, tau, distance, ratio, strict_tau, descriptor_dir,
                       export_descriptors, out);
    if (label_cmd->parsed())
      return run_label(ads_path, predictions_path, texts_path, lexicon_dir, out);
    if (join_cmd->parsed())
      return run_join(ads_path, manifest_path, areas_path, out);
    if (analyze_cmd->parsed())
      return run_analyze(manifest_path, group_by_token, force, out);
    if (report_cmd->parsed())
      return run_report(out);
    if (eval_cmd->parsed())
      return run_eval(preds_path, truth_path, subsets, seed, gt_raster, pred_raster,
                      billboard_class, min_pixels, iou_match, out);
    std::cerr << "unknown subcommand\n";
    return 1;
  } catch (const InputError& e) {
    std::cerr << stage << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << stage << ": internal error: " << e.what() << "\n";
    return 2;
  }
}
