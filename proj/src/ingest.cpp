#include "adscan/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

#include "adscan/csv.hpp"

namespace adscan {
namespace ingest {

namespace {

using nlohmann::json;

std::string lowercase(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<LatLon> parse_ring(const json& ring, const std::string& where) {
  std::vector<LatLon> out;
  for (const auto& coord : ring) {
    if (!coord.is_array() || coord.size() < 2)
      throw InputError(where + ": bad coordinate");
    // RFC 7946: [lon, lat]
    out.push_back({coord.at(1).get<double>(), coord.at(0).get<double>()});
  }
  if (out.size() < 4 || !(out.front() == out.back()))
    throw InputError(where + ": ring not closed");
  return out;
}

PolygonRings parse_polygon(const json& coords, const std::string& where) {
  PolygonRings poly;
  for (const auto& ring : coords) poly.rings.push_back(parse_ring(ring, where));
  if (poly.rings.empty()) throw InputError(where + ": polygon without rings");
  return poly;
}

}  // namespace

std::vector<GeoImage> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<GeoImage> images;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw InputError(where + ": malformed JSON");
    for (const char* field : {"id", "lat", "lon", "captured_at", "raster_path",
                              "width", "height"})
      if (!j.contains(field))
        throw InputError(where + ": missing field " + field);
    try {
      GeoImage im;
      im.id = j["id"].get<std::string>();
      im.lat = j["lat"].get<double>();
      im.lon = j["lon"].get<double>();
      im.captured_at = j["captured_at"].get<std::string>();
      im.raster_ref = j["raster_path"].get<std::string>();
      im.width = j["width"].get<int>();
      im.height = j["height"].get<int>();
      if (j.contains("image_path")) im.image_ref = j["image_path"].get<std::string>();
      images.push_back(std::move(im));
    } catch (const json::exception& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  auto issues = validate_manifest(images);
  if (!issues.empty()) {
    std::string msg = "manifest validation failed:";
    for (const auto& is : issues)
      msg += "\n  record " + std::to_string(is.index) + " (" + is.id + ") " +
             is.field + ": " + is.message;
    throw InputError(msg);
  }
  return images;
}

std::vector<AreaUnit> load_areas(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  json root = json::parse(in, nullptr, false);
  if (root.is_discarded()) throw InputError(path + ": malformed JSON");
  if (root.value("type", "") != "FeatureCollection")
    throw InputError(path + ": not a FeatureCollection");

  std::vector<AreaUnit> areas;
  std::size_t idx = 0;
  for (const auto& feature : root.at("features")) {
    const std::string where = path + " feature " + std::to_string(idx++);
    const auto& props = feature.at("properties");
    AreaUnit area;
    try {
      area.code = props.at("code").get<std::string>();
      area.imd_decile = props.at("imd_decile").get<int>();
      area.oac_supergroup = props.at("oac_supergroup").get<int>();
      area.oac_group = props.at("oac_group").get<std::string>();
    } catch (const json::exception& e) {
      throw InputError(where + ": " + e.what());
    }
    if (area.imd_decile < 1 || area.imd_decile > 10)
      throw InputError(where + ": imd_decile " + std::to_string(area.imd_decile) +
                       " outside 1-10");
    if (!valid_oac_group(area.oac_group))
      throw InputError(where + ": unknown oac_group " + area.oac_group);
    if (oac_supergroup_of(area.oac_group) != area.oac_supergroup)
      throw InputError(where + ": group " + area.oac_group +
                       " inconsistent with supergroup " +
                       std::to_string(area.oac_supergroup));

    const auto& geom = feature.at("geometry");
    const std::string gtype = geom.value("type", "");
    if (gtype == "Polygon") {
      area.polygons.push_back(parse_polygon(geom.at("coordinates"), where));
    } else if (gtype == "MultiPolygon") {
      for (const auto& poly : geom.at("coordinates"))
        area.polygons.push_back(parse_polygon(poly, where));
    } else {
      throw InputError(where + ": unsupported geometry type " + gtype);
    }
    areas.push_back(std::move(area));
  }
  return areas;
}

std::vector<KeywordLexicon> load_lexicons(const std::string& dir) {
  const struct {
    AdCategory category;
    const char* file;
  } wanted[] = {
      {AdCategory::Food, "food.txt"},
      {AdCategory::Alcohol, "alcohol.txt"},
      {AdCategory::Gambling, "gambling.txt"},
  };
  std::vector<KeywordLexicon> out;
  for (const auto& w : wanted) {
    std::string path = dir + "/" + w.file;
    std::ifstream in(path);
    if (!in) throw InputError("missing lexicon file " + path);
    KeywordLexicon lex;
    lex.category = w.category;
    std::string line;
    while (std::getline(in, line)) {
      std::string phrase = trim(line);
      if (phrase.empty() || phrase[0] == '#') continue;
      lex.phrases.insert(lowercase(phrase));
    }
    if (lex.phrases.empty())
      throw InputError(std::string("empty lexicon: ") + category_name(w.category));
    out.push_back(std::move(lex));
  }
  return out;
}

std::map<std::string, AdCategory> load_predictions(const std::string& path) {
  csv::Table t = csv::read_file(path);
  if (t.header != std::vector<std::string>{"ad_id", "category"})
    throw InputError(path + ": expected header \"ad_id,category\"");
  std::map<std::string, AdCategory> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string where = "line " + std::to_string(i + 2);
    const auto& row = t.rows[i];
    if (row.size() != 2)
      throw InputError(path + " " + where + ": expected 2 fields");
    auto cat = parse_category(row[1]);
    if (!cat)
      throw InputError("unknown category '" + row[1] + "' " + where);
    if (!out.emplace(row[0], *cat).second)
      throw InputError("duplicate ad_id " + row[0] + " " + where);
  }
  return out;
}

std::map<std::string, std::string> load_texts(const std::string& path) {
  csv::Table t = csv::read_file(path);
  if (t.header != std::vector<std::string>{"ad_id", "text"})
    throw InputError(path + ": expected header \"ad_id,text\"");
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    if (row.size() != 2)
      throw InputError(path + " line " + std::to_string(i + 2) +
                       ": expected 2 fields");
    if (!out.emplace(row[0], row[1]).second)
      throw InputError("duplicate ad_id " + row[0] + " line " +
                       std::to_string(i + 2));
  }
  return out;
}

}  // namespace ingest
}  // namespace adscan
