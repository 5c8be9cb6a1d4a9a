#ifndef ADSCAN_SERIAL_HPP
#define ADSCAN_SERIAL_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "adscan/types.hpp"

namespace adscan {
namespace serial {

using ojson = nlohmann::ordered_json;

// ads.jsonl record schema (one object per line):
//   ad_id, source_image, hull [[x,y],...], component_pixels, filled_pixels,
//   bbox [min_x,min_y,max_x,max_y], lat, lon, category?, crop_ref?
ojson ad_to_json(const AdInstance& ad);
AdInstance ad_from_json(const nlohmann::json& j, const std::string& origin);

std::vector<AdInstance> load_ads_jsonl(const std::string& path);
void write_ads_jsonl(const std::vector<AdInstance>& ads, const std::string& path);

}  // namespace serial
}  // namespace adscan

#endif  // ADSCAN_SERIAL_HPP
