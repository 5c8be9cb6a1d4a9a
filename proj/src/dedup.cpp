#include "adscan/dedup.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <limits>
#include <set>

namespace adscan {
namespace dedup {

double haversine(const LatLon& a, const LatLon& b) {
  constexpr double kDeg = M_PI / 180.0;
  double phi1 = a.lat * kDeg, phi2 = b.lat * kDeg;
  double dphi = (b.lat - a.lat) * kDeg;
  double dlambda = (b.lon - a.lon) * kDeg;
  double s = std::sin(dphi / 2), t = std::sin(dlambda / 2);
  double h = s * s + std::cos(phi1) * std::cos(phi2) * t * t;
  return 2.0 * kEarthRadiusM * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
}

// ---------------------------------------------------------------------------
// Feature detection and description.

namespace {

struct FloatImage {
  int w = 0, h = 0;
  std::vector<float> data;
  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * w + x]; }
  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * w + x]; }
};

// Separable binomial blur [1 4 6 4 1]/16, borders clamped.
FloatImage blur5(const FloatImage& src) {
  static const float k[5] = {1.f / 16, 4.f / 16, 6.f / 16, 4.f / 16, 1.f / 16};
  FloatImage tmp{src.w, src.h, std::vector<float>(src.data.size())};
  FloatImage out{src.w, src.h, std::vector<float>(src.data.size())};
  for (int y = 0; y < src.h; ++y)
    for (int x = 0; x < src.w; ++x) {
      float s = 0;
      for (int i = -2; i <= 2; ++i)
        s += k[i + 2] * src.at(std::clamp(x + i, 0, src.w - 1), y);
      tmp.at(x, y) = s;
    }
  for (int y = 0; y < src.h; ++y)
    for (int x = 0; x < src.w; ++x) {
      float s = 0;
      for (int i = -2; i <= 2; ++i)
        s += k[i + 2] * tmp.at(x, std::clamp(y + i, 0, src.h - 1));
      out.at(x, y) = s;
    }
  return out;
}

float bilinear(const FloatImage& img, double x, double y) {
  if (x < 0 || y < 0 || x > img.w - 1 || y > img.h - 1) return 0.f;
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  int x1 = std::min(x0 + 1, img.w - 1);
  int y1 = std::min(y0 + 1, img.h - 1);
  double fx = x - x0, fy = y - y0;
  return static_cast<float>((1 - fx) * (1 - fy) * img.at(x0, y0) +
                            fx * (1 - fy) * img.at(x1, y0) +
                            (1 - fx) * fy * img.at(x0, y1) +
                            fx * fy * img.at(x1, y1));
}

constexpr int kMargin = 14;      // descriptor window must fit after rotation
constexpr int kMaxKeypoints = 400;
constexpr double kHarrisK = 0.04;
constexpr double kRelThreshold = 0.005;

struct Corner {
  int x, y;
  float response;
};

}  // namespace

DescriptorSet compute_descriptors(const LabelRaster& crop) {
  if (crop.width < 16 || crop.height < 16) return {};
  const int w = crop.width, h = crop.height;

  FloatImage img{w, h, std::vector<float>(static_cast<std::size_t>(w) * h)};
  for (std::size_t i = 0; i < img.data.size(); ++i)
    img.data[i] = crop.pixels[i] / 255.0f;
  FloatImage smooth = blur5(img);

  FloatImage gx{w, h, std::vector<float>(img.data.size(), 0.f)};
  FloatImage gy{w, h, std::vector<float>(img.data.size(), 0.f)};
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      gx.at(x, y) = 0.5f * (smooth.at(x + 1, y) - smooth.at(x - 1, y));
      gy.at(x, y) = 0.5f * (smooth.at(x, y + 1) - smooth.at(x, y - 1));
    }

  // Structure tensor products, smoothed with the same binomial window.
  FloatImage xx{w, h, std::vector<float>(img.data.size())};
  FloatImage yy{w, h, std::vector<float>(img.data.size())};
  FloatImage xy{w, h, std::vector<float>(img.data.size())};
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    xx.data[i] = gx.data[i] * gx.data[i];
    yy.data[i] = gy.data[i] * gy.data[i];
    xy.data[i] = gx.data[i] * gy.data[i];
  }
  xx = blur5(xx);
  yy = blur5(yy);
  xy = blur5(xy);

  FloatImage resp{w, h, std::vector<float>(img.data.size(), 0.f)};
  float max_resp = 0.f;
  for (int y = kMargin; y < h - kMargin; ++y)
    for (int x = kMargin; x < w - kMargin; ++x) {
      double a = xx.at(x, y), b = yy.at(x, y), c = xy.at(x, y);
      double r = a * b - c * c - kHarrisK * (a + b) * (a + b);
      resp.at(x, y) = static_cast<float>(r);
      if (r > max_resp) max_resp = static_cast<float>(r);
    }
  if (max_resp <= 1e-12f) return {};  // gradient-free input

  const float threshold = static_cast<float>(kRelThreshold) * max_resp;
  std::vector<Corner> corners;
  for (int y = kMargin; y < h - kMargin; ++y)
    for (int x = kMargin; x < w - kMargin; ++x) {
      float r = resp.at(x, y);
      if (r <= threshold) continue;
      // 3x3 non-maximum suppression, >= against earlier neighbours in scan
      // order and > against later ones so plateaus keep one point.
      bool is_max = r >= resp.at(x - 1, y - 1) && r >= resp.at(x, y - 1) &&
                    r >= resp.at(x + 1, y - 1) && r >= resp.at(x - 1, y) &&
                    r > resp.at(x + 1, y) && r > resp.at(x - 1, y + 1) &&
                    r > resp.at(x, y + 1) && r > resp.at(x + 1, y + 1);
      if (is_max) corners.push_back({x, y, r});
    }
  std::sort(corners.begin(), corners.end(), [](const Corner& a, const Corner& b) {
    if (a.response != b.response) return a.response > b.response;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  if (corners.size() > kMaxKeypoints) corners.resize(kMaxKeypoints);

  DescriptorSet out;
  out.reserve(corners.size());
  for (const Corner& c : corners) {
    // Dominant orientation over a radius-6 window, 36 bins.
    double hist[36] = {};
    for (int dy = -6; dy <= 6; ++dy)
      for (int dx = -6; dx <= 6; ++dx) {
        double mx = gx.at(c.x + dx, c.y + dy);
        double my = gy.at(c.x + dx, c.y + dy);
        double mag = std::sqrt(mx * mx + my * my);
        if (mag < 1e-12) continue;
        double weight = mag * std::exp(-(dx * dx + dy * dy) / (2.0 * 4.5 * 4.5));
        double theta = std::atan2(my, mx);  // [-pi, pi]
        int bin = std::clamp(static_cast<int>((theta + M_PI) / (2 * M_PI) * 36), 0, 35);
        hist[bin] += weight;
      }
    int best_bin = 0;
    for (int i = 1; i < 36; ++i)
      if (hist[i] > hist[best_bin]) best_bin = i;
    double theta0 = (best_bin + 0.5) * (2 * M_PI / 36) - M_PI;
    double ct = std::cos(theta0), st = std::sin(theta0);

    // 16x16 samples -> 4x4 spatial cells x 8 orientation bins, trilinear.
    std::array<double, kDescriptorDim> acc{};
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) {
        double u = j - 7.5, v = i - 7.5;  // rotated frame offsets
        double sx = c.x + ct * u - st * v;
        double sy = c.y + st * u + ct * v;
        double mx = bilinear(gx, sx, sy);
        double my = bilinear(gy, sx, sy);
        double mag = std::sqrt(mx * mx + my * my);
        if (mag < 1e-12) continue;
        double weight = mag * std::exp(-(u * u + v * v) / (2.0 * 8.0 * 8.0));
        double rel = std::atan2(my, mx) - theta0;
        while (rel < 0) rel += 2 * M_PI;
        while (rel >= 2 * M_PI) rel -= 2 * M_PI;

        double cs = (u + 8.0) / 4.0 - 0.5;  // cell-space coords in [-0.5, 3.5]
        double rs = (v + 8.0) / 4.0 - 0.5;
        double os = rel / (2 * M_PI) * 8.0 - 0.5;
        int c0 = static_cast<int>(std::floor(cs));
        int r0 = static_cast<int>(std::floor(rs));
        int o0 = static_cast<int>(std::floor(os));
        double fc = cs - c0, fr = rs - r0, fo = os - o0;
        for (int dc = 0; dc <= 1; ++dc)
          for (int dr = 0; dr <= 1; ++dr)
            for (int dq = 0; dq <= 1; ++dq) {
              int cc = c0 + dc, rr = r0 + dr;
              if (cc < 0 || cc > 3 || rr < 0 || rr > 3) continue;
              int oo = (o0 + dq + 8) % 8;
              double wgt = weight * (dc ? fc : 1 - fc) * (dr ? fr : 1 - fr) *
                           (dq ? fo : 1 - fo);
              acc[(rr * 4 + cc) * 8 + oo] += wgt;
            }
      }

    double norm = 0;
    for (double x : acc) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-12) continue;
    for (double& x : acc) x = std::min(x / norm, 0.2);  // SIFT-style clamp
    norm = 0;
    for (double x : acc) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-12) continue;

    Descriptor d;
    d.x = static_cast<float>(c.x);
    d.y = static_cast<float>(c.y);
    for (int k = 0; k < kDescriptorDim; ++k)
      d.v[k] = static_cast<float>(acc[k] / norm);
    out.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matching.

namespace {

struct NearestTwo {
  int best = -1;
  double d1 = std::numeric_limits<double>::infinity();
  double d2 = std::numeric_limits<double>::infinity();
};

double sqdist(const Descriptor& a, const Descriptor& b) {
  double s = 0;
  for (int i = 0; i < kDescriptorDim; ++i) {
    double d = static_cast<double>(a.v[i]) - b.v[i];
    s += d * d;
  }
  return s;
}

std::vector<NearestTwo> nearest_two(const DescriptorSet& from,
                                    const DescriptorSet& to) {
  std::vector<NearestTwo> out(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) {
    NearestTwo& nt = out[i];
    for (std::size_t j = 0; j < to.size(); ++j) {
      double d = sqdist(from[i], to[j]);
      if (d < nt.d1) {
        nt.d2 = nt.d1;
        nt.d1 = d;
        nt.best = static_cast<int>(j);
      } else if (d < nt.d2) {
        nt.d2 = d;
      }
    }
  }
  return out;
}

bool ratio_pass(const NearestTwo& nt, double ratio) {
  // Squared distances: d1 < ratio*d2 <=> d1^2 < ratio^2*d2^2.
  if (nt.best < 0) return false;
  if (!std::isfinite(nt.d2)) return true;  // single candidate
  return nt.d1 < ratio * ratio * nt.d2;
}

}  // namespace

int match_count(const DescriptorSet& a, const DescriptorSet& b, double ratio) {
  if (a.empty() || b.empty()) return 0;
  auto ab = nearest_two(a, b);
  auto ba = nearest_two(b, a);
  int count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!ratio_pass(ab[i], ratio)) continue;
    int j = ab[i].best;
    if (ba[j].best == static_cast<int>(i) && ratio_pass(ba[j], ratio)) ++count;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Graph construction and representative selection.

DedupGraph build_dedup_graph(const std::vector<AdInstance>& ads,
                             const std::map<std::string, DescriptorSet>& descriptors,
                             const DedupConfig& cfg) {
  for (const auto& ad : ads)
    if (!descriptors.count(ad.ad_id))
      throw InputError("missing descriptor entry for ad " + ad.ad_id);

  // Sort ids so the result is independent of input ordering.
  std::vector<const AdInstance*> sorted;
  sorted.reserve(ads.size());
  for (const auto& ad : ads) sorted.push_back(&ad);
  std::sort(sorted.begin(), sorted.end(),
            [](const AdInstance* a, const AdInstance* b) { return a->ad_id < b->ad_id; });

  DedupGraph g;
  g.nodes.reserve(sorted.size());
  for (const auto* ad : sorted) g.nodes.push_back(ad->ad_id);

  // Candidate pairs via ~d-sized lat/lon buckets. Falls back to exhaustive
  // pairing near the poles where the cell geometry degrades.
  const double meters_per_deg = M_PI * kEarthRadiusM / 180.0;
  double max_abs_lat = 0;
  for (const auto* ad : sorted) max_abs_lat = std::max(max_abs_lat, std::fabs(ad->lat));

  std::set<std::pair<std::size_t, std::size_t>> candidates;
  if (max_abs_lat > 85.0 || sorted.size() < 2) {
    for (std::size_t i = 0; i < sorted.size(); ++i)
      for (std::size_t j = i + 1; j < sorted.size(); ++j) candidates.insert({i, j});
  } else {
    const double dlat = cfg.distance_m / meters_per_deg;
    const double dlon =
        cfg.distance_m / (meters_per_deg * std::cos(max_abs_lat * M_PI / 180.0));
    const long lon_cells = std::max(3L, std::lround(std::ceil(360.0 / dlon)));
    std::map<std::pair<long, long>, std::vector<std::size_t>> cells;
    auto cell_of = [&](const AdInstance* ad) {
      long cy = static_cast<long>(std::floor(ad->lat / dlat));
      long cx = static_cast<long>(std::floor((ad->lon + 180.0) / dlon)) % lon_cells;
      return std::pair<long, long>{cy, cx};
    };
    for (std::size_t i = 0; i < sorted.size(); ++i)
      cells[cell_of(sorted[i])].push_back(i);
    for (const auto& [key, members] : cells) {
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          auto nkey = std::pair<long, long>{key.first + dy,
                                            ((key.second + dx) % lon_cells + lon_cells) % lon_cells};
          auto it = cells.find(nkey);
          if (it == cells.end()) continue;
          for (std::size_t i : members)
            for (std::size_t j : it->second)
              if (i < j) candidates.insert({i, j});
        }
    }
  }

  for (const auto& [i, j] : candidates) {
    const AdInstance* a = sorted[i];
    const AdInstance* b = sorted[j];
    if (haversine({a->lat, a->lon}, {b->lat, b->lon}) > cfg.distance_m) continue;
    int matches = match_count(descriptors.at(a->ad_id), descriptors.at(b->ad_id),
                              cfg.ratio);
    bool edge = cfg.strict_tau ? matches > cfg.tau : matches >= cfg.tau;
    if (edge) g.edges.push_back({a->ad_id, b->ad_id, matches});
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const MatchEdge& x, const MatchEdge& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });

  // Connected components by BFS over the adjacency lists.
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& e : g.edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  std::set<std::string> visited;
  for (const auto& id : g.nodes) {
    if (visited.count(id)) continue;
    std::vector<std::string> comp;
    std::deque<std::string> queue{id};
    visited.insert(id);
    while (!queue.empty()) {
      std::string cur = queue.front();
      queue.pop_front();
      comp.push_back(cur);
      auto it = adj.find(cur);
      if (it == adj.end()) continue;
      for (const auto& next : it->second)
        if (visited.insert(next).second) queue.push_back(next);
    }
    std::sort(comp.begin(), comp.end());
    g.components.push_back(std::move(comp));
  }
  std::sort(g.components.begin(), g.components.end());
  return g;
}

namespace {

// Distances within a tie band select by ad_id instead; exactly symmetric
// layouts would otherwise depend on floating-point rounding.
constexpr double kTieEps = 1e-9;

std::string representative_of(const std::vector<std::string>& component,
                              const std::map<std::string, const AdInstance*>& by_id) {
  if (component.size() == 1) return component.front();
  double sum_lat = 0, sum_lon = 0;
  for (const auto& id : component) {
    const AdInstance* ad = by_id.at(id);
    sum_lat += ad->lat;
    sum_lon += ad->lon;
  }
  LatLon centroid{sum_lat / component.size(), sum_lon / component.size()};
  double min_d = std::numeric_limits<double>::infinity();
  for (const auto& id : component) {
    const AdInstance* ad = by_id.at(id);
    min_d = std::min(min_d, haversine({ad->lat, ad->lon}, centroid));
  }
  // Component ids are sorted, so the first within the tie band wins.
  for (const auto& id : component) {
    const AdInstance* ad = by_id.at(id);
    if (haversine({ad->lat, ad->lon}, centroid) <= min_d + kTieEps) return id;
  }
  return component.front();
}

std::map<std::string, const AdInstance*> index_ads(const std::vector<AdInstance>& ads) {
  std::map<std::string, const AdInstance*> by_id;
  for (const auto& ad : ads) by_id[ad.ad_id] = &ad;
  return by_id;
}

}  // namespace

std::vector<AdInstance> select_representatives(const DedupGraph& graph,
                                               const std::vector<AdInstance>& ads) {
  auto by_id = index_ads(ads);
  std::vector<AdInstance> out;
  out.reserve(graph.components.size());
  for (const auto& comp : graph.components) {
    for (const auto& id : comp)
      if (!by_id.count(id))
        throw InputError("graph component references unknown ad " + id);
    out.push_back(*by_id.at(representative_of(comp, by_id)));
  }
  std::sort(out.begin(), out.end(), [](const AdInstance& a, const AdInstance& b) {
    return a.ad_id < b.ad_id;
  });
  return out;
}

std::vector<std::pair<std::string, std::string>> duplicate_mapping(
    const DedupGraph& graph, const std::vector<AdInstance>& ads) {
  auto by_id = index_ads(ads);
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& comp : graph.components) {
    if (comp.size() < 2) continue;
    std::string rep = representative_of(comp, by_id);
    for (const auto& id : comp)
      if (id != rep) out.emplace_back(id, rep);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Sidecar I/O.

namespace {

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& s, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(s, bits);
}

std::uint32_t get_u32(const std::string& s, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + i])) << (8 * i);
  return v;
}

float get_f32(const std::string& s, std::size_t off) {
  std::uint32_t bits = get_u32(s, off);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

void write_descriptors(const DescriptorSet& descs, const std::string& path) {
  std::string buf;
  buf.reserve(8 + descs.size() * (2 + kDescriptorDim) * 4);
  put_u32(buf, static_cast<std::uint32_t>(descs.size()));
  put_u32(buf, kDescriptorDim);
  for (const auto& d : descs) {
    put_f32(buf, d.x);
    put_f32(buf, d.y);
    for (float f : d.v) put_f32(buf, f);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

DescriptorSet read_descriptors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < 8) throw InputError(path + ": truncated descriptor header");
  std::uint32_t count = get_u32(buf, 0);
  std::uint32_t dim = get_u32(buf, 4);
  if (dim != kDescriptorDim)
    throw InputError(path + ": descriptor dim " + std::to_string(dim) +
                     ", expected " + std::to_string(kDescriptorDim));
  std::size_t row = (2 + kDescriptorDim) * 4;
  if (buf.size() < 8 + count * row)
    throw InputError(path + ": truncated descriptor rows, expected " +
                     std::to_string(8 + count * row) + " bytes, got " +
                     std::to_string(buf.size()));
  DescriptorSet out(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::size_t off = 8 + i * row;
    out[i].x = get_f32(buf, off);
    out[i].y = get_f32(buf, off + 4);
    for (int k = 0; k < kDescriptorDim; ++k)
      out[i].v[k] = get_f32(buf, off + 8 + 4 * k);
  }
  return out;
}

}  // namespace dedup
}  // namespace adscan
