#include "adscan/rectify.hpp"

#include <algorithm>
#include <cmath>

namespace adscan {
namespace rectify {

namespace {

constexpr double kDetEps = 1e-12;

double tri2(const DPoint& o, const DPoint& a, const DPoint& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double poly_area4(const std::array<DPoint, 4>& v) {
  double s = 0;
  for (int i = 0; i < 4; ++i) {
    const DPoint& a = v[i];
    const DPoint& b = v[(i + 1) % 4];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

// Orders 4 points CCW around their centroid, first vertex = top-left-most.
// "Top-left" is judged along the x+y diagonal: for near-upright quads that
// choice is stable against small boundary jitter, so repeated sightings of
// one billboard rectify with the same corner correspondence.
Quad order_quad(std::array<DPoint, 4> pts) {
  DPoint c{(pts[0].x + pts[1].x + pts[2].x + pts[3].x) / 4.0,
           (pts[0].y + pts[1].y + pts[2].y + pts[3].y) / 4.0};
  std::sort(pts.begin(), pts.end(), [&](const DPoint& a, const DPoint& b) {
    return std::atan2(a.y - c.y, a.x - c.x) < std::atan2(b.y - c.y, b.x - c.x);
  });
  if (poly_area4(pts) < 0) std::swap(pts[1], pts[3]);
  int start = 0;
  for (int i = 1; i < 4; ++i) {
    double di = pts[i].x + pts[i].y, ds = pts[start].x + pts[start].y;
    if (di < ds || (di == ds && (pts[i].y < pts[start].y ||
                                 (pts[i].y == pts[start].y &&
                                  pts[i].x < pts[start].x))))
      start = i;
  }
  Quad q;
  for (int i = 0; i < 4; ++i) q.v[i] = pts[(start + i) % 4];
  return q;
}

// Gaussian elimination with partial pivoting; returns false when singular.
bool solve8(double a[8][9]) {
  for (int col = 0; col < 8; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 8; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    if (std::fabs(a[pivot][col]) < kDetEps) return false;
    if (pivot != col)
      for (int c = col; c < 9; ++c) std::swap(a[pivot][c], a[col][c]);
    for (int r = 0; r < 8; ++r) {
      if (r == col) continue;
      double f = a[r][col] / a[col][col];
      for (int c = col; c < 9; ++c) a[r][c] -= f * a[col][c];
    }
  }
  for (int r = 0; r < 8; ++r) a[r][8] /= a[r][r];
  return true;
}

}  // namespace

double Homography::det() const {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

std::optional<Homography> invert(const Homography& h) {
  double d = h.det();
  if (std::fabs(d) < kDetEps) return std::nullopt;
  const auto& m = h.m;
  Homography out;
  out.m[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
  out.m[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
  out.m[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
  out.m[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d;
  out.m[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
  out.m[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
  out.m[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d;
  out.m[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d;
  out.m[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
  // Renormalize to m[2][2] = 1.
  double s = out.m[2][2];
  if (std::fabs(s) < kDetEps) return std::nullopt;
  for (auto& row : out.m)
    for (auto& e : row) e /= s;
  return out;
}

double quad_area(const Quad& q) { return poly_area4(q.v); }

std::optional<Quad> fit_quad(const std::vector<PixelPoint>& hull) {
  const std::size_t n = hull.size();
  if (n < 3) return std::nullopt;

  auto dp = [&](std::size_t i) {
    return DPoint{static_cast<double>(hull[i].x), static_cast<double>(hull[i].y)};
  };

  if (n == 3) {
    // Duplicate one vertex into the midpoint of the longest edge.
    double best_len = -1;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      DPoint a = dp(i), b = dp((i + 1) % 3);
      double len = (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
      if (len > best_len) {
        best_len = len;
        best_i = i;
      }
    }
    DPoint a = dp(best_i), b = dp((best_i + 1) % 3);
    DPoint mid{(a.x + b.x) / 2.0, (a.y + b.y) / 2.0};
    std::array<DPoint, 4> pts{dp(best_i), mid, dp((best_i + 1) % 3),
                              dp((best_i + 2) % 3)};
    // Keep hull order: a, mid, b, remaining vertex is already CCW.
    Quad q = order_quad(pts);
    if (std::fabs(quad_area(q)) < 1e-12) return std::nullopt;
    return q;
  }

  if (n == 4) {
    std::array<DPoint, 4> pts{dp(0), dp(1), dp(2), dp(3)};
    return order_quad(pts);
  }

  if (n <= 24) {
    // Exhaustive maximum-area 4-subset; hull order makes each subset convex.
    double best = -1;
    std::array<std::size_t, 4> sel{};
    for (std::size_t i = 0; i + 3 < n; ++i)
      for (std::size_t j = i + 1; j + 2 < n; ++j)
        for (std::size_t k = j + 1; k + 1 < n; ++k)
          for (std::size_t l = k + 1; l < n; ++l) {
            double area = 0.5 * (tri2(dp(i), dp(j), dp(k)) +
                                 tri2(dp(i), dp(k), dp(l)));
            if (area > best) {
              best = area;
              sel = {i, j, k, l};
            }
          }
    if (best <= 1e-12) return std::nullopt;
    std::array<DPoint, 4> pts{dp(sel[0]), dp(sel[1]), dp(sel[2]), dp(sel[3])};
    return order_quad(pts);
  }

  // Large hulls: vertices extreme along the +-45 degree diagonals.
  auto extreme = [&](auto score) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (score(hull[i]) > score(hull[best])) best = i;
    return best;
  };
  std::size_t tl = extreme([](const PixelPoint& p) { return -(p.x + p.y); });
  std::size_t tr = extreme([](const PixelPoint& p) { return p.x - p.y; });
  std::size_t br = extreme([](const PixelPoint& p) { return p.x + p.y; });
  std::size_t bl = extreme([](const PixelPoint& p) { return p.y - p.x; });
  if (tl == tr || tl == br || tl == bl || tr == br || tr == bl || br == bl)
    return std::nullopt;
  Quad q = order_quad({dp(tl), dp(tr), dp(br), dp(bl)});
  if (std::fabs(quad_area(q)) < 1e-12) return std::nullopt;
  return q;
}

std::optional<Homography> homography_from_quad(const Quad& src, double dst_w,
                                               double dst_h) {
  const DPoint dst[4] = {{0, 0}, {dst_w, 0}, {dst_w, dst_h}, {0, dst_h}};
  // Unknowns a..h with H = [a b c; d e f; g h 1]:
  //   a x + b y + c - g x u - h y u = u
  //   d x + e y + f - g x v - h y v = v
  double sys[8][9] = {};
  for (int i = 0; i < 4; ++i) {
    double x = src.v[i].x, y = src.v[i].y;
    double u = dst[i].x, v = dst[i].y;
    double* r0 = sys[2 * i];
    double* r1 = sys[2 * i + 1];
    r0[0] = x; r0[1] = y; r0[2] = 1; r0[6] = -x * u; r0[7] = -y * u; r0[8] = u;
    r1[3] = x; r1[4] = y; r1[5] = 1; r1[6] = -x * v; r1[7] = -y * v; r1[8] = v;
  }
  if (!solve8(sys)) return std::nullopt;
  Homography h;
  h.m = {{{sys[0][8], sys[1][8], sys[2][8]},
          {sys[3][8], sys[4][8], sys[5][8]},
          {sys[6][8], sys[7][8], 1.0}}};
  if (std::fabs(h.det()) < kDetEps) return std::nullopt;
  return h;
}

namespace {

template <typename Raster, int Channels>
Raster warp_impl(const Raster& src, const Homography& h, int out_w, int out_h) {
  auto inv = invert(h);
  Raster out;
  out.width = out_w;
  out.height = out_h;
  out.pixels.assign(static_cast<std::size_t>(out_w) * out_h * Channels, 0);
  if (!inv) return out;

  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      DPoint s = inv->apply({static_cast<double>(x), static_cast<double>(y)});
      if (s.x < 0 || s.y < 0 || s.x > src.width - 1 || s.y > src.height - 1)
        continue;
      int x0 = static_cast<int>(std::floor(s.x));
      int y0 = static_cast<int>(std::floor(s.y));
      int x1 = std::min(x0 + 1, src.width - 1);
      int y1 = std::min(y0 + 1, src.height - 1);
      double fx = s.x - x0, fy = s.y - y0;
      for (int ch = 0; ch < Channels; ++ch) {
        auto px = [&](int sx, int sy) {
          return static_cast<double>(
              src.pixels[(static_cast<std::size_t>(sy) * src.width + sx) *
                             Channels +
                         ch]);
        };
        double val = (1 - fx) * (1 - fy) * px(x0, y0) +
                     fx * (1 - fy) * px(x1, y0) +
                     (1 - fx) * fy * px(x0, y1) + fx * fy * px(x1, y1);
        out.pixels[(static_cast<std::size_t>(y) * out_w + x) * Channels + ch] =
            static_cast<std::uint8_t>(
                std::clamp(std::lround(val), 0L, 255L));
      }
    }
  }
  return out;
}

}  // namespace

LabelRaster warp(const LabelRaster& src, const Homography& h, int out_w,
                 int out_h) {
  return warp_impl<LabelRaster, 1>(src, h, out_w, out_h);
}

RgbRaster warp(const RgbRaster& src, const Homography& h, int out_w, int out_h) {
  return warp_impl<RgbRaster, 3>(src, h, out_w, out_h);
}

}  // namespace rectify
}  // namespace adscan
