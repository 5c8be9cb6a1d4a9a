#ifndef ADSCAN_RASTER_IO_HPP
#define ADSCAN_RASTER_IO_HPP

#include <string>
#include <vector>

#include "adscan/types.hpp"

namespace adscan {

// RGB raster, 3 bytes per pixel, row-major.
struct RgbRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // size = width*height*3

  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  std::uint8_t* at(int x, int y) {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

namespace raster_io {

// Binary PGM (P5), maxval <= 255. '#' comment lines allowed in the header.
// Errors report the offending detail: wrong magic, oversized maxval,
// truncated pixel data (expected vs actual byte counts).
LabelRaster load_pgm(const std::string& path);
LabelRaster parse_pgm(const std::string& bytes, const std::string& origin);

// Canonical header: "P5 <w> <h> 255\n" followed by raw bytes. Loading a
// canonical file and writing it back is byte-identical.
void write_pgm(const LabelRaster& raster, const std::string& path);
std::string render_pgm(const LabelRaster& raster);

// Binary PPM (P6) for color crops; same header conventions.
RgbRaster load_ppm(const std::string& path);
void write_ppm(const RgbRaster& raster, const std::string& path);
std::string render_ppm(const RgbRaster& raster);

// Rec.601-weighted gray conversion, integer arithmetic.
LabelRaster to_gray(const RgbRaster& rgb);

}  // namespace raster_io
}  // namespace adscan

#endif  // ADSCAN_RASTER_IO_HPP
