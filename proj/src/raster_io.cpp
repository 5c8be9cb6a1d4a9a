#include "adscan/raster_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace adscan {
namespace raster_io {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("short write to " + path);
}

// Reads the next header token, skipping whitespace and '#' comments.
// Returns false at end of input.
bool next_token(const std::string& s, std::size_t& pos, std::string& tok) {
  while (pos < s.size()) {
    char c = s[pos];
    if (c == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= s.size()) return false;
  std::size_t start = pos;
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) &&
         s[pos] != '#')
    ++pos;
  tok = s.substr(start, pos - start);
  return true;
}

long parse_header_int(const std::string& tok, const std::string& what,
                      const std::string& origin) {
  try {
    std::size_t used = 0;
    long v = std::stol(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw InputError(origin + ": bad " + what + " \"" + tok + "\"");
  }
}

struct PnmHeader {
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t data_offset = 0;
};

PnmHeader parse_header(const std::string& bytes, const std::string& magic,
                       const std::string& origin) {
  std::size_t pos = 0;
  std::string tok;
  if (!next_token(bytes, pos, tok)) throw InputError(origin + ": empty file");
  if (tok != magic)
    throw InputError(origin + ": unsupported magic " + tok);
  PnmHeader h;
  if (!next_token(bytes, pos, tok)) throw InputError(origin + ": missing width");
  h.width = static_cast<int>(parse_header_int(tok, "width", origin));
  if (!next_token(bytes, pos, tok)) throw InputError(origin + ": missing height");
  h.height = static_cast<int>(parse_header_int(tok, "height", origin));
  if (!next_token(bytes, pos, tok)) throw InputError(origin + ": missing maxval");
  h.maxval = static_cast<int>(parse_header_int(tok, "maxval", origin));
  if (h.width < 1 || h.height < 1)
    throw InputError(origin + ": nonpositive dimensions " +
                     std::to_string(h.width) + "x" + std::to_string(h.height));
  if (h.maxval < 1 || h.maxval > 255)
    throw InputError(origin + ": maxval " + std::to_string(h.maxval) +
                     " exceeds 255");
  // Exactly one whitespace byte separates the header from pixel data.
  if (pos >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw InputError(origin + ": missing header terminator");
  h.data_offset = pos + 1;
  return h;
}

}  // namespace

LabelRaster parse_pgm(const std::string& bytes, const std::string& origin) {
  PnmHeader h = parse_header(bytes, "P5", origin);
  std::size_t expected = static_cast<std::size_t>(h.width) * h.height;
  std::size_t actual = bytes.size() - h.data_offset;
  if (actual < expected)
    throw InputError(origin + ": truncated pixel data, expected " +
                     std::to_string(expected) + " bytes, got " +
                     std::to_string(actual));
  LabelRaster r;
  r.width = h.width;
  r.height = h.height;
  r.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset),
                  bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset + expected));
  return r;
}

LabelRaster load_pgm(const std::string& path) {
  return parse_pgm(read_file(path), path);
}

std::string render_pgm(const LabelRaster& raster) {
  std::string out = "P5 " + std::to_string(raster.width) + " " +
                    std::to_string(raster.height) + " 255\n";
  out.append(raster.pixels.begin(), raster.pixels.end());
  return out;
}

void write_pgm(const LabelRaster& raster, const std::string& path) {
  write_file(path, render_pgm(raster));
}

RgbRaster load_ppm(const std::string& path) {
  std::string bytes = read_file(path);
  PnmHeader h = parse_header(bytes, "P6", path);
  std::size_t expected = static_cast<std::size_t>(h.width) * h.height * 3;
  std::size_t actual = bytes.size() - h.data_offset;
  if (actual < expected)
    throw InputError(path + ": truncated pixel data, expected " +
                     std::to_string(expected) + " bytes, got " +
                     std::to_string(actual));
  RgbRaster r;
  r.width = h.width;
  r.height = h.height;
  r.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset),
                  bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset + expected));
  return r;
}

std::string render_ppm(const RgbRaster& raster) {
  std::string out = "P6 " + std::to_string(raster.width) + " " +
                    std::to_string(raster.height) + " 255\n";
  out.append(raster.pixels.begin(), raster.pixels.end());
  return out;
}

void write_ppm(const RgbRaster& raster, const std::string& path) {
  write_file(path, render_ppm(raster));
}

LabelRaster to_gray(const RgbRaster& rgb) {
  LabelRaster g;
  g.width = rgb.width;
  g.height = rgb.height;
  g.pixels.resize(static_cast<std::size_t>(rgb.width) * rgb.height);
  for (std::size_t i = 0; i < g.pixels.size(); ++i) {
    const std::uint8_t* p = rgb.pixels.data() + i * 3;
    g.pixels[i] = static_cast<std::uint8_t>(
        (299 * p[0] + 587 * p[1] + 114 * p[2] + 500) / 1000);
  }
  return g;
}

}  // namespace raster_io
}  // namespace adscan
