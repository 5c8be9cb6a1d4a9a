#ifndef ADSCAN_INGEST_HPP
#define ADSCAN_INGEST_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "adscan/types.hpp"

namespace adscan {
namespace ingest {

struct KeywordLexicon {
  AdCategory category = AdCategory::Other;
  std::set<std::string> phrases;  // lowercase, trimmed, deduplicated
};

// JSON Lines manifest: one object per line with id, lat, lon, captured_at,
// raster_path, width, height and optional image_path. Parse errors carry the
// line number; validation failures are delegated to validate_manifest and
// reported together.
std::vector<GeoImage> load_manifest(const std::string& path);

// GeoJSON FeatureCollection (RFC 7946, [lon, lat] coordinate order) with
// Polygon / MultiPolygon geometries and properties code, imd_decile,
// oac_supergroup, oac_group.
std::vector<AreaUnit> load_areas(const std::string& path);

// Directory with food.txt, alcohol.txt, gambling.txt: one phrase per line,
// '#' comments, UTF-8.
std::vector<KeywordLexicon> load_lexicons(const std::string& dir);

// CSV "ad_id,category"; category token case-insensitive; duplicate ad_id is
// an error.
std::map<std::string, AdCategory> load_predictions(const std::string& path);

// CSV "ad_id,text" sidecar for keyword labeling over external OCR output.
std::map<std::string, std::string> load_texts(const std::string& path);

}  // namespace ingest
}  // namespace adscan

#endif  // ADSCAN_INGEST_HPP
