#include "adscan/serial.hpp"

#include <fstream>

namespace adscan {
namespace serial {

ojson ad_to_json(const AdInstance& ad) {
  ojson j;
  j["ad_id"] = ad.ad_id;
  j["source_image"] = ad.source_image;
  ojson hull = ojson::array();
  for (const auto& p : ad.hull) hull.push_back({p.x, p.y});
  j["hull"] = std::move(hull);
  j["component_pixels"] = ad.component_pixels;
  j["filled_pixels"] = ad.filled_pixels;
  j["bbox"] = {ad.bbox.min_x, ad.bbox.min_y, ad.bbox.max_x, ad.bbox.max_y};
  j["lat"] = ad.lat;
  j["lon"] = ad.lon;
  if (ad.category) j["category"] = category_name(*ad.category);
  if (!ad.crop_ref.empty()) j["crop_ref"] = ad.crop_ref;
  return j;
}

AdInstance ad_from_json(const nlohmann::json& j, const std::string& origin) {
  try {
    AdInstance ad;
    ad.ad_id = j.at("ad_id").get<std::string>();
    ad.source_image = j.at("source_image").get<std::string>();
    for (const auto& p : j.at("hull"))
      ad.hull.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    ad.component_pixels = j.at("component_pixels").get<std::int64_t>();
    ad.filled_pixels = j.at("filled_pixels").get<std::int64_t>();
    const auto& b = j.at("bbox");
    ad.bbox = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(),
               b.at(3).get<int>()};
    ad.lat = j.at("lat").get<double>();
    ad.lon = j.at("lon").get<double>();
    if (j.contains("category")) {
      auto c = parse_category(j["category"].get<std::string>());
      if (!c)
        throw InputError(origin + ": unknown category '" +
                         j["category"].get<std::string>() + "'");
      ad.category = *c;
    }
    if (j.contains("crop_ref")) ad.crop_ref = j["crop_ref"].get<std::string>();
    return ad;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(origin + ": " + e.what());
  }
}

std::vector<AdInstance> load_ads_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<AdInstance> ads;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw InputError(path + " line " + std::to_string(lineno) +
                       ": malformed JSON");
    ads.push_back(ad_from_json(j, path + " line " + std::to_string(lineno)));
  }
  return ads;
}

void write_ads_jsonl(const std::vector<AdInstance>& ads, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  for (const auto& ad : ads) out << ad_to_json(ad).dump() << "\n";
}

}  // namespace serial
}  // namespace adscan
