// Independent reference implementations used only by tests. These stay
// deliberately naive (and slow) so they share no code path with the library.
#ifndef ADSCAN_TEST_ORACLES_HPP
#define ADSCAN_TEST_ORACLES_HPP

#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "adscan/types.hpp"

namespace oracles {

// Stack-based flood fill over 8-neighbourhoods; returns components as sorted
// pixel sets in discovery order.
inline std::vector<std::vector<adscan::PixelPoint>> flood_fill_components(
    const adscan::LabelRaster& raster, int class_id) {
  const int w = raster.width, h = raster.height;
  std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
  std::vector<std::vector<adscan::PixelPoint>> comps;
  for (int sy = 0; sy < h; ++sy)
    for (int sx = 0; sx < w; ++sx) {
      if (raster.at(sx, sy) != class_id || seen[static_cast<std::size_t>(sy) * w + sx])
        continue;
      std::vector<adscan::PixelPoint> comp;
      std::vector<adscan::PixelPoint> stack{{sx, sy}};
      seen[static_cast<std::size_t>(sy) * w + sx] = 1;
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        comp.push_back({x, y});
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (raster.at(nx, ny) != class_id) continue;
            if (seen[static_cast<std::size_t>(ny) * w + nx]) continue;
            seen[static_cast<std::size_t>(ny) * w + nx] = 1;
            stack.push_back({nx, ny});
          }
      }
      std::sort(comp.begin(), comp.end(),
                [](const adscan::PixelPoint& a, const adscan::PixelPoint& b) {
                  return a.y != b.y ? a.y < b.y : a.x < b.x;
                });
      comps.push_back(std::move(comp));
    }
  return comps;
}

// O(n^3) hull: a pair of distinct points forms a hull edge iff every other
// point lies strictly on one side (collinear points allowed on the edge).
// Returns the hull as a set of extreme vertices.
inline std::set<std::pair<int, int>> brute_force_hull_vertices(
    const std::vector<adscan::PixelPoint>& points) {
  std::vector<adscan::PixelPoint> pts = points;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::set<std::pair<int, int>> hull;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      bool all_left = true;
      bool any_strict = false;
      for (std::size_t k = 0; k < n && all_left; ++k) {
        if (k == i || k == j) continue;
        std::int64_t c =
            static_cast<std::int64_t>(pts[j].x - pts[i].x) * (pts[k].y - pts[i].y) -
            static_cast<std::int64_t>(pts[j].y - pts[i].y) * (pts[k].x - pts[i].x);
        if (c < 0) all_left = false;
        if (c > 0) any_strict = true;
        // Collinear point on the segment: endpoint may be non-extreme; only
        // keep i, j if they are the segment's extremes.
      }
      if (!all_left || !any_strict) continue;
      // Drop edge endpoints that are interior to a longer collinear run.
      bool i_extreme = true, j_extreme = true;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        std::int64_t c =
            static_cast<std::int64_t>(pts[j].x - pts[i].x) * (pts[k].y - pts[i].y) -
            static_cast<std::int64_t>(pts[j].y - pts[i].y) * (pts[k].x - pts[i].x);
        if (c != 0) continue;
        // k collinear with (i, j): check if it extends past either endpoint.
        auto dot = [&](const adscan::PixelPoint& a, const adscan::PixelPoint& b,
                       const adscan::PixelPoint& p) {
          return static_cast<std::int64_t>(b.x - a.x) * (p.x - a.x) +
                 static_cast<std::int64_t>(b.y - a.y) * (p.y - a.y);
        };
        if (dot(pts[i], pts[j], pts[k]) < 0) i_extreme = false;
        std::int64_t len2 = dot(pts[i], pts[j], pts[j]);
        if (dot(pts[i], pts[j], pts[k]) > len2) j_extreme = false;
      }
      if (i_extreme) hull.insert({pts[i].x, pts[i].y});
      if (j_extreme) hull.insert({pts[j].x, pts[j].y});
    }
  return hull;
}

// Winding-number containment for simple polygons (nonzero rule on a single
// ring; even-odd over rings reproduced by xor for hole semantics).
inline bool winding_number_inside(const adscan::LatLon& p,
                                  const std::vector<adscan::LatLon>& ring) {
  int winding = 0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const auto& a = ring[i];
    const auto& b = ring[i + 1];
    double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    if (a.lat <= p.lat) {
      if (b.lat > p.lat && cross > 0) ++winding;
    } else {
      if (b.lat <= p.lat && cross < 0) --winding;
    }
  }
  return winding != 0;
}

inline bool on_ring_edge(const adscan::LatLon& p,
                         const std::vector<adscan::LatLon>& ring) {
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const auto& a = ring[i];
    const auto& b = ring[i + 1];
    double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    if (cross != 0.0) continue;
    if (p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon) &&
        p.lat >= std::min(a.lat, b.lat) && p.lat <= std::max(a.lat, b.lat))
      return true;
  }
  return false;
}

inline bool winding_polygon_inside(const adscan::LatLon& p,
                                   const adscan::PolygonRings& poly) {
  for (const auto& ring : poly.rings)
    if (on_ring_edge(p, ring)) return true;
  bool inside = false;
  for (const auto& ring : poly.rings)
    if (winding_number_inside(p, ring)) inside = !inside;
  return inside;
}

// Plain union-find used as the component oracle for dedup graphs.
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Temp directory scoped to one test.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("adscan_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline int rng_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline double rng_real(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

}  // namespace oracles

#endif  // ADSCAN_TEST_ORACLES_HPP
