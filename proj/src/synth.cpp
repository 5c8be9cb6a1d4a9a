#include "adscan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include <json.hpp>

#include "adscan/dedup.hpp"
#include "adscan/rectify.hpp"

namespace adscan {
namespace synth {

namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Uniform integer in [lo, hi] from raw engine output; avoids distribution
// objects so results are identical across standard libraries.
int rng_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

constexpr int kTextureSize = 224;  // canonical texture coordinate extent
constexpr int kTextureKnots = 32;  // random-value grid, bilinear between knots

// Per-ad texture: random values on a coarse knot grid, interpolated smoothly
// over the canonical square. Band-limiting to the knot spacing keeps the
// content stable under the two bilinear resamplings between planting and
// rectification, while knot randomness gives dense distinctive corners so
// distinct ads share almost no features.
LabelRaster make_texture(std::uint64_t seed, const std::string& true_id) {
  std::mt19937_64 rng(seed ^ fnv1a64(true_id));
  LabelRaster tex;
  tex.width = kTextureKnots;
  tex.height = kTextureKnots;
  tex.pixels.resize(static_cast<std::size_t>(kTextureKnots) * kTextureKnots);
  for (auto& v : tex.pixels) v = static_cast<std::uint8_t>(rng_int(rng, 0, 255));
  return tex;
}

// Samples the knot grid at canonical coordinates [0, kTextureSize).
double tex_sample(const LabelRaster& tex, double x, double y) {
  double sx = std::clamp(x, 0.0, static_cast<double>(kTextureSize)) *
              (tex.width - 1) / kTextureSize;
  double sy = std::clamp(y, 0.0, static_cast<double>(kTextureSize)) *
              (tex.height - 1) / kTextureSize;
  int x0 = std::min(static_cast<int>(sx), tex.width - 2);
  int y0 = std::min(static_cast<int>(sy), tex.height - 2);
  double fx = sx - x0, fy = sy - y0;
  return (1 - fx) * (1 - fy) * tex.at(x0, y0) + fx * (1 - fy) * tex.at(x0 + 1, y0) +
         (1 - fx) * fy * tex.at(x0, y0 + 1) + fx * fy * tex.at(x0 + 1, y0 + 1);
}

std::int64_t cross(const PixelPoint& o, const PixelPoint& a, const PixelPoint& b) {
  return static_cast<std::int64_t>(a.x - o.x) * (b.y - o.y) -
         static_cast<std::int64_t>(a.y - o.y) * (b.x - o.x);
}

bool strictly_convex_ccw(const std::array<PixelPoint, 4>& q) {
  for (int i = 0; i < 4; ++i)
    if (cross(q[i], q[(i + 1) % 4], q[(i + 2) % 4]) <= 0) return false;
  return true;
}

bool inside_quad(const std::array<PixelPoint, 4>& q, const PixelPoint& p) {
  for (int i = 0; i < 4; ++i)
    if (cross(q[i], q[(i + 1) % 4], p) < 0) return false;
  return true;
}

std::string frame_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "synth_%06d", index);
  return buf;
}

std::string timestamp_at(int index) {
  // 0.5 s capture interval from a fixed base instant.
  long total_ms = 500L * index;
  long sec = total_ms / 1000;
  int ms = static_cast<int>(total_ms % 1000);
  int h = 10 + static_cast<int>(sec / 3600);
  int m = static_cast<int>((sec / 60) % 60);
  int s = static_cast<int>(sec % 60);
  char buf[40];
  std::snprintf(buf, sizeof buf, "2020-01-14T%02d:%02d:%02d.%03dZ", h, m, s, ms);
  return buf;
}

}  // namespace

SynthSpec parse_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw InputError(path + ": malformed JSON");
  SynthSpec spec;
  try {
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.frames = j.at("frames").get<int>();
    spec.frame_width = j.at("frame_width").get<int>();
    spec.frame_height = j.at("frame_height").get<int>();
    spec.billboard_class = j.value("billboard_class", 1);
    if (j.contains("track")) {
      const auto& t = j["track"];
      spec.track.start_lat = t.value("start_lat", spec.track.start_lat);
      spec.track.start_lon = t.value("start_lon", spec.track.start_lon);
      spec.track.heading_deg = t.value("heading_deg", spec.track.heading_deg);
      spec.track.spacing_m = t.value("spacing_m", spec.track.spacing_m);
    }
    for (const auto& a : j.at("ads")) {
      SynthAd ad;
      ad.true_id = a.at("true_id").get<std::string>();
      auto cat = parse_category(a.at("category").get<std::string>());
      if (!cat)
        throw InputError(path + ": unknown category for ad " + ad.true_id);
      ad.category = *cat;
      ad.size_px = a.at("size_px").get<std::int64_t>();
      for (const auto& f : a.at("frames")) ad.frames.push_back(f.get<int>());
      ad.jitter_px = a.value("jitter_px", 0);
      if (a.contains("lat") && a.contains("lon"))
        ad.world_pos = LatLon{a["lat"].get<double>(), a["lon"].get<double>()};
      spec.ads.push_back(std::move(ad));
    }
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  return spec;
}

Scene generate_scene(const SynthSpec& spec) {
  if (spec.frames < 1) throw InputError("synth spec: frames must be >= 1");
  if (spec.frame_width < 64 || spec.frame_height < 64)
    throw InputError("synth spec: frame size must be at least 64x64");
  for (const auto& ad : spec.ads) {
    if (ad.size_px < 9) throw InputError("synth spec: ad size too small");
    for (int f : ad.frames)
      if (f < 0 || f >= spec.frames)
        throw InputError("synth spec: ad " + ad.true_id +
                         " references frame " + std::to_string(f));
  }

  Scene scene;
  const double meters_per_deg = M_PI * dedup::kEarthRadiusM / 180.0;
  const double heading = spec.track.heading_deg * M_PI / 180.0;

  for (int f = 0; f < spec.frames; ++f) {
    GeoImage im;
    im.id = frame_id(f);
    double north_m = spec.track.spacing_m * f * std::cos(heading);
    double east_m = spec.track.spacing_m * f * std::sin(heading);
    im.lat = spec.track.start_lat + north_m / meters_per_deg;
    im.lon = spec.track.start_lon +
             east_m / (meters_per_deg *
                       std::cos(spec.track.start_lat * M_PI / 180.0));
    im.captured_at = timestamp_at(f);
    im.width = spec.frame_width;
    im.height = spec.frame_height;
    im.raster_ref = "frames/" + im.id + "_labels.pgm";
    im.image_ref = "frames/" + im.id + "_photo.pgm";
    scene.images.push_back(std::move(im));

    LabelRaster labels;
    labels.width = spec.frame_width;
    labels.height = spec.frame_height;
    labels.pixels.assign(
        static_cast<std::size_t>(spec.frame_width) * spec.frame_height, 0);
    scene.labels.push_back(std::move(labels));

    LabelRaster photo = scene.labels.back();
    photo.pixels.assign(photo.pixels.size(), 128);
    scene.photos.push_back(std::move(photo));
  }

  std::map<int, std::vector<std::size_t>> by_frame;
  for (std::size_t i = 0; i < spec.ads.size(); ++i)
    for (int f : spec.ads[i].frames) by_frame[f].push_back(i);

  std::vector<LabelRaster> textures;
  textures.reserve(spec.ads.size());
  for (const auto& ad : spec.ads)
    textures.push_back(make_texture(spec.seed, ad.true_id));

  std::mt19937_64 rng(spec.seed);
  for (const auto& [f, ad_indices] : by_frame) {
    LabelRaster& labels = scene.labels[static_cast<std::size_t>(f)];
    LabelRaster& photo = scene.photos[static_cast<std::size_t>(f)];
    int cursor_x = 8;
    for (std::size_t ai : ad_indices) {
      const SynthAd& ad = spec.ads[ai];
      int side = std::max(3, static_cast<int>(std::lround(std::sqrt(
                                 static_cast<double>(ad.size_px)))));
      int jitter = std::min(ad.jitter_px, side / 4);
      int x0 = cursor_x + jitter + 1;
      int y0 = 8 + jitter + 1;
      int x1 = x0 + side - 1;
      int y1 = y0 + side - 1;
      if (x1 + jitter + 2 >= spec.frame_width || y1 + jitter + 2 >= spec.frame_height)
        throw InputError("synth spec: ads overlap or do not fit in frame " +
                         std::to_string(f));
      cursor_x = x1 + jitter + 12;  // disjoint slots keep components unambiguous

      std::array<PixelPoint, 4> quad{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
      if (jitter > 0) {
        for (int attempt = 0; attempt < 20; ++attempt) {
          std::array<PixelPoint, 4> moved = quad;
          for (auto& v : moved) {
            v.x += rng_int(rng, -jitter, jitter);
            v.y += rng_int(rng, -jitter, jitter);
          }
          if (strictly_convex_ccw(moved)) {
            quad = moved;
            break;
          }
        }
      }

      // Homography quad -> canonical texture square for consistent content
      // across frames.
      rectify::Quad src;
      for (int i = 0; i < 4; ++i)
        src.v[i] = {static_cast<double>(quad[i].x), static_cast<double>(quad[i].y)};
      auto h = rectify::homography_from_quad(src, kTextureSize, kTextureSize);
      if (!h) throw InputError("synth spec: degenerate planted quad");

      PlantedRegion region;
      region.frame_id = scene.images[static_cast<std::size_t>(f)].id;
      region.true_id = ad.true_id;
      region.category = ad.category;
      region.quad = quad;
      if (ad.world_pos) {
        region.world_pos = *ad.world_pos;
      } else {
        const GeoImage& first =
            scene.images[static_cast<std::size_t>(ad.frames.front())];
        region.world_pos = {first.lat, first.lon};
      }

      int min_x = std::min({quad[0].x, quad[1].x, quad[2].x, quad[3].x});
      int max_x = std::max({quad[0].x, quad[1].x, quad[2].x, quad[3].x});
      int min_y = std::min({quad[0].y, quad[1].y, quad[2].y, quad[3].y});
      int max_y = std::max({quad[0].y, quad[1].y, quad[2].y, quad[3].y});
      for (int y = min_y; y <= max_y; ++y)
        for (int x = min_x; x <= max_x; ++x) {
          if (!inside_quad(quad, {x, y})) continue;
          if (labels.at(x, y) != 0)
            throw InputError("synth spec: ads overlap in frame " +
                             std::to_string(f));
          labels.set(x, y, static_cast<std::uint8_t>(spec.billboard_class));
          rectify::DPoint t = h->apply({static_cast<double>(x), static_cast<double>(y)});
          double val = tex_sample(textures[ai], t.x, t.y);
          photo.set(x, y, static_cast<std::uint8_t>(
                              std::clamp(std::lround(val), 0L, 255L)));
          region.pixel_count++;
        }
      scene.regions.push_back(std::move(region));
    }
  }
  return scene;
}

void write_scene(const Scene& scene, const SynthSpec& spec,
                 const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "frames");

  std::ofstream manifest(fs::path(out_dir) / "manifest.jsonl",
                         std::ios::binary | std::ios::trunc);
  if (!manifest) throw InputError("cannot write manifest under " + out_dir);
  for (std::size_t i = 0; i < scene.images.size(); ++i) {
    const GeoImage& im = scene.images[i];
    ojson j;
    j["id"] = im.id;
    j["lat"] = im.lat;
    j["lon"] = im.lon;
    j["captured_at"] = im.captured_at;
    j["raster_path"] = im.raster_ref;
    j["image_path"] = im.image_ref;
    j["width"] = im.width;
    j["height"] = im.height;
    manifest << j.dump() << "\n";
    raster_io::write_pgm(scene.labels[i],
                         (fs::path(out_dir) / im.raster_ref).string());
    raster_io::write_pgm(scene.photos[i],
                         (fs::path(out_dir) / im.image_ref).string());
  }

  ojson truth;
  truth["seed"] = spec.seed;
  truth["frames"] = spec.frames;
  truth["frame_width"] = spec.frame_width;
  truth["frame_height"] = spec.frame_height;
  truth["billboard_class"] = spec.billboard_class;
  ojson regions = ojson::array();
  for (const auto& r : scene.regions) {
    ojson jr;
    jr["frame"] = r.frame_id;
    jr["true_id"] = r.true_id;
    jr["category"] = category_name(r.category);
    jr["pixel_count"] = r.pixel_count;
    jr["world_lat"] = r.world_pos.lat;
    jr["world_lon"] = r.world_pos.lon;
    ojson quad = ojson::array();
    for (const auto& p : r.quad) quad.push_back({p.x, p.y});
    jr["quad"] = std::move(quad);
    regions.push_back(std::move(jr));
  }
  truth["regions"] = std::move(regions);
  std::ofstream tf(fs::path(out_dir) / "truth.json",
                   std::ios::binary | std::ios::trunc);
  if (!tf) throw InputError("cannot write truth.json under " + out_dir);
  tf << truth.dump(2) << "\n";
}

}  // namespace synth
}  // namespace adscan
