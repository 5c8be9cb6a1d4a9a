#ifndef ADSCAN_RECTIFY_HPP
#define ADSCAN_RECTIFY_HPP

#include <array>
#include <optional>

#include "adscan/raster_io.hpp"
#include "adscan/types.hpp"

namespace adscan {
namespace rectify {

struct DPoint {
  double x = 0.0;
  double y = 0.0;
};

// Four vertices, CCW (positive shoelace), starting from the top-left-most
// vertex (minimal y, then minimal x).
struct Quad {
  std::array<DPoint, 4> v;
};

// 3x3 projective transform, normalized so m[2][2] = 1.
struct Homography {
  std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  DPoint apply(const DPoint& p) const {
    double w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
    return {(m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w,
            (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w};
  }
  double det() const;
};

std::optional<Homography> invert(const Homography& h);

// Maximum-area quadrilateral on hull vertices: exhaustive over 4-subsets for
// hulls of up to 24 vertices, diagonal-extreme corners beyond that. A
// 3-vertex hull gets the midpoint of its longest edge as fourth vertex.
// Degenerate input (zero-area choices only) -> nullopt.
std::optional<Quad> fit_quad(const std::vector<PixelPoint>& hull);

// Exact 4-point direct linear transform onto the rectangle
// (0,0),(dst_w,0),(dst_w,dst_h),(0,dst_h). Singular systems (three collinear
// vertices) and non-invertible results -> nullopt.
std::optional<Homography> homography_from_quad(const Quad& src, double dst_w,
                                               double dst_h);

// Inverse-mapped warp with bilinear sampling; out-of-bounds samples are 0.
LabelRaster warp(const LabelRaster& src, const Homography& h, int out_w,
                 int out_h);
RgbRaster warp(const RgbRaster& src, const Homography& h, int out_w, int out_h);

double quad_area(const Quad& q);

}  // namespace rectify
}  // namespace adscan

#endif  // ADSCAN_RECTIFY_HPP
