#ifndef ADSCAN_SYNTH_HPP
#define ADSCAN_SYNTH_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "adscan/raster_io.hpp"
#include "adscan/types.hpp"

namespace adscan {
namespace synth {

struct SynthAd {
  std::string true_id;
  AdCategory category = AdCategory::Other;
  std::int64_t size_px = 2500;    // nominal pixel target; truth carries exact counts
  std::vector<int> frames;        // frame indices this ad appears in
  int jitter_px = 0;              // per-frame corner perturbation bound
  std::optional<LatLon> world_pos;  // defaults to the first appearance's GPS
};

struct SynthTrack {
  double start_lat = 53.4;
  double start_lon = -2.98;
  double heading_deg = 90.0;  // clockwise from north; default east
  double spacing_m = 4.0;     // distance between consecutive frames
};

struct SynthSpec {
  std::uint64_t seed = 0;
  int frames = 1;
  int frame_width = 640;
  int frame_height = 480;
  int billboard_class = 1;
  SynthTrack track;
  std::vector<SynthAd> ads;
};

SynthSpec parse_spec(const std::string& path);

struct PlantedRegion {
  std::string frame_id;
  std::string true_id;
  AdCategory category = AdCategory::Other;
  std::int64_t pixel_count = 0;
  std::array<PixelPoint, 4> quad;
  LatLon world_pos;
};

struct Scene {
  std::vector<GeoImage> images;          // raster/image refs relative to out dir
  std::vector<LabelRaster> labels;       // per frame
  std::vector<LabelRaster> photos;       // per frame, gray
  std::vector<PlantedRegion> regions;
};

// Fully seed-determined scene: label rasters with planted billboard-class
// quads, gray photos with a per-ad texture warped into each quad, GPS
// positions along a straight constant-speed track, and exact per-region
// pixel counts. Overlapping plants in one frame are a spec error.
Scene generate_scene(const SynthSpec& spec);

// Writes manifest.jsonl, frames/*.pgm and truth.json under out_dir.
void write_scene(const Scene& scene, const SynthSpec& spec,
                 const std::string& out_dir);

}  // namespace synth
}  // namespace adscan

#endif  // ADSCAN_SYNTH_HPP
