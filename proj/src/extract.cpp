#include "adscan/extract.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace adscan {
namespace extract {

namespace {

// Union-find over provisional row labels.
struct DisjointSet {
  std::vector<int> parent;
  int make() {
    parent.push_back(static_cast<int>(parent.size()));
    return parent.back();
  }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::int64_t cross(const PixelPoint& o, const PixelPoint& a, const PixelPoint& b) {
  return static_cast<std::int64_t>(a.x - o.x) * (b.y - o.y) -
         static_cast<std::int64_t>(a.y - o.y) * (b.x - o.x);
}

}  // namespace

std::vector<PixelComponent> connected_components(const LabelRaster& raster,
                                                 int class_id) {
  const int w = raster.width, h = raster.height;
  std::vector<int> labels(static_cast<std::size_t>(w) * h, -1);
  DisjointSet ds;

  // First pass: scan order, union with already-visited 8-neighbours
  // (left, upper-left, up, upper-right).
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (raster.at(x, y) != class_id) continue;
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      int lbl = -1;
      const int nx[4] = {x - 1, x - 1, x, x + 1};
      const int ny[4] = {y, y - 1, y - 1, y - 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || nx[k] >= w || ny[k] < 0) continue;
        int nl = labels[static_cast<std::size_t>(ny[k]) * w + nx[k]];
        if (nl < 0) continue;
        if (lbl < 0) lbl = nl;
        else ds.unite(lbl, nl);
      }
      if (lbl < 0) lbl = ds.make();
      labels[idx] = lbl;
    }
  }

  // Second pass: resolve roots, gather pixels in (y,x) order.
  std::vector<int> root_to_comp(ds.parent.size(), -1);
  std::vector<PixelComponent> comps;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int lbl = labels[static_cast<std::size_t>(y) * w + x];
      if (lbl < 0) continue;
      int root = ds.find(lbl);
      int ci = root_to_comp[root];
      if (ci < 0) {
        ci = static_cast<int>(comps.size());
        root_to_comp[root] = ci;
        comps.push_back({});
        comps[ci].bbox = {x, y, x, y};
      }
      PixelComponent& c = comps[ci];
      c.pixels.push_back({x, y});
      c.bbox.min_x = std::min(c.bbox.min_x, x);
      c.bbox.min_y = std::min(c.bbox.min_y, y);
      c.bbox.max_x = std::max(c.bbox.max_x, x);
      c.bbox.max_y = std::max(c.bbox.max_y, y);
    }
  }

  std::sort(comps.begin(), comps.end(),
            [](const PixelComponent& a, const PixelComponent& b) {
              if (a.bbox.min_y != b.bbox.min_y) return a.bbox.min_y < b.bbox.min_y;
              if (a.bbox.min_x != b.bbox.min_x) return a.bbox.min_x < b.bbox.min_x;
              if (a.pixels[0].y != b.pixels[0].y) return a.pixels[0].y < b.pixels[0].y;
              return a.pixels[0].x < b.pixels[0].x;
            });
  return comps;
}

std::optional<std::vector<PixelPoint>> convex_hull(std::vector<PixelPoint> points) {
  std::sort(points.begin(), points.end(), [](const PixelPoint& a, const PixelPoint& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) return std::nullopt;

  const std::size_t n = points.size();
  std::vector<PixelPoint> hull(2 * n);
  std::size_t k = 0;
  // Lower chain.
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
    hull[k++] = points[i];
  }
  // Upper chain.
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);  // last point repeats the first
  if (hull.size() < 3) return std::nullopt;  // all collinear
  return hull;
}

LabelRaster fill_polygon(const std::vector<PixelPoint>& hull, int width,
                         int height) {
  LabelRaster mask;
  mask.width = width;
  mask.height = height;
  mask.pixels.assign(static_cast<std::size_t>(width) * height, 0);

  int min_x = hull[0].x, max_x = hull[0].x, min_y = hull[0].y, max_y = hull[0].y;
  for (const auto& p : hull) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  min_x = std::max(min_x, 0);
  min_y = std::max(min_y, 0);
  max_x = std::min(max_x, width - 1);
  max_y = std::min(max_y, height - 1);

  const std::size_t n = hull.size();
  for (int y = min_y; y <= max_y; ++y) {
    for (int x = min_x; x <= max_x; ++x) {
      PixelPoint p{x, y};
      bool inside = true;
      for (std::size_t i = 0; i < n && inside; ++i) {
        // CCW hull: inside-or-on means every edge sees p on its left.
        if (cross(hull[i], hull[(i + 1) % n], p) < 0) inside = false;
      }
      if (inside) mask.set(x, y, 1);
    }
  }
  return mask;
}

std::int64_t count_filled(const std::vector<PixelPoint>& hull) {
  int min_x = hull[0].x, max_x = hull[0].x, min_y = hull[0].y, max_y = hull[0].y;
  for (const auto& p : hull) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const std::size_t n = hull.size();
  std::int64_t count = 0;
  for (int y = min_y; y <= max_y; ++y) {
    for (int x = min_x; x <= max_x; ++x) {
      PixelPoint p{x, y};
      bool inside = true;
      for (std::size_t i = 0; i < n && inside; ++i)
        if (cross(hull[i], hull[(i + 1) % n], p) < 0) inside = false;
      if (inside) ++count;
    }
  }
  return count;
}

std::int64_t shoelace2(const std::vector<PixelPoint>& poly) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const PixelPoint& a = poly[i];
    const PixelPoint& b = poly[(i + 1) % poly.size()];
    s += static_cast<std::int64_t>(a.x) * b.y - static_cast<std::int64_t>(b.x) * a.y;
  }
  return s;
}

ExtractResult extract_ads(const LabelRaster& raster, const GeoImage& image,
                          const ExtractConfig& cfg) {
  if (raster.width != image.width || raster.height != image.height)
    throw InputError("raster dimensions " + std::to_string(raster.width) + "x" +
                     std::to_string(raster.height) + " do not match manifest " +
                     std::to_string(image.width) + "x" +
                     std::to_string(image.height) + " for image " + image.id);

  ExtractResult result;
  auto comps = connected_components(raster, cfg.billboard_class);
  int ordinal = 0;
  for (const auto& comp : comps) {
    auto hull = convex_hull(comp.pixels);
    if (!hull) {
      result.warnings.push_back("image " + image.id +
                                ": degenerate hull discarded (component of " +
                                std::to_string(comp.size()) + " px)");
      continue;
    }
    std::int64_t filled = count_filled(*hull);
    if (filled < cfg.min_pixels) continue;

    AdInstance ad;
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "_%03d", ordinal++);
    ad.ad_id = image.id + suffix;
    ad.source_image = image.id;
    ad.hull = std::move(*hull);
    ad.component_pixels = comp.size();
    ad.filled_pixels = filled;
    ad.bbox = comp.bbox;
    ad.lat = image.lat;
    ad.lon = image.lon;
    result.ads.push_back(std::move(ad));
  }
  return result;
}

}  // namespace extract
}  // namespace adscan
