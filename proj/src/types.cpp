#include "adscan/types.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace adscan {

const char* category_name(AdCategory c) {
  switch (c) {
    case AdCategory::Food: return "food";
    case AdCategory::Alcohol: return "alcohol";
    case AdCategory::Gambling: return "gambling";
    case AdCategory::Other: return "other";
  }
  return "other";
}

std::optional<AdCategory> parse_category(const std::string& token) {
  std::string t;
  t.reserve(token.size());
  for (char ch : token) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (t == "food") return AdCategory::Food;
  if (t == "alcohol") return AdCategory::Alcohol;
  if (t == "gambling") return AdCategory::Gambling;
  if (t == "other") return AdCategory::Other;
  return std::nullopt;
}

namespace {

struct OacEntry {
  const char* group;
  const char* name;
};

// 2011 OAC: 8 Supergroups / 26 Groups.
const char* kSupergroupNames[9] = {
    "",
    "Rural Residents",
    "Cosmopolitans",
    "Ethnicity Central",
    "Multicultural Metropolitans",
    "Urbanites",
    "Suburbanites",
    "Constrained City Dwellers",
    "Hard-Pressed Living",
};

const OacEntry kGroups[] = {
    {"1a", "Farming Communities"},
    {"1b", "Rural Tenants"},
    {"1c", "Ageing Rural Dwellers"},
    {"2a", "Students Around Campus"},
    {"2b", "Inner-City Students"},
    {"2c", "Comfortable Cosmopolitans"},
    {"2d", "Aspiring and Affluent"},
    {"3a", "Ethnic Family Life"},
    {"3b", "Endeavouring Ethnic Mix"},
    {"3c", "Ethnic Dynamics"},
    {"3d", "Aspirational Techies"},
    {"4a", "Rented Family Living"},
    {"4b", "Challenged Asian Terraces"},
    {"4c", "Asian Traits"},
    {"5a", "Urban Professionals and Families"},
    {"5b", "Ageing Urban Living"},
    {"6a", "Suburban Achievers"},
    {"6b", "Semi-Detached Suburbia"},
    {"7a", "Challenged Diversity"},
    {"7b", "Constrained Flat Dwellers"},
    {"7c", "White Communities"},
    {"7d", "Ageing City Dwellers"},
    {"8a", "Industrious Communities"},
    {"8b", "Challenged Terraced Workers"},
    {"8c", "Hard-Pressed Ageing Workers"},
    {"8d", "Migration and Churn"},
};

}  // namespace

bool valid_oac_group(const std::string& group) {
  for (const auto& e : kGroups)
    if (group == e.group) return true;
  return false;
}

int oac_supergroup_of(const std::string& group) {
  if (group.size() != 2 || group[0] < '1' || group[0] > '8') return 0;
  return valid_oac_group(group) ? group[0] - '0' : 0;
}

const char* oac_supergroup_name(int supergroup) {
  if (supergroup < 1 || supergroup > 8) return "";
  return kSupergroupNames[supergroup];
}

const char* oac_group_name(const std::string& group) {
  for (const auto& e : kGroups)
    if (group == e.group) return e.name;
  return "";
}

std::vector<std::string> all_oac_groups() {
  std::vector<std::string> out;
  out.reserve(std::size(kGroups));
  for (const auto& e : kGroups) out.emplace_back(e.group);
  return out;
}

const char* group_by_name(GroupBy g) {
  switch (g) {
    case GroupBy::Decile: return "decile";
    case GroupBy::Supergroup: return "supergroup";
    case GroupBy::Group: return "group";
  }
  return "decile";
}

std::optional<GroupBy> parse_group_by(const std::string& token) {
  if (token == "decile") return GroupBy::Decile;
  if (token == "supergroup") return GroupBy::Supergroup;
  if (token == "group") return GroupBy::Group;
  return std::nullopt;
}

std::string stars_for(double p_value) {
  if (p_value < 0.001) return "***";
  if (p_value < 0.01) return "**";
  if (p_value < 0.05) return "*";
  return "";
}

std::vector<ManifestIssue> validate_manifest(const std::vector<GeoImage>& images) {
  std::vector<ManifestIssue> issues;
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const GeoImage& im = images[i];
    auto add = [&](const std::string& field, const std::string& msg) {
      issues.push_back({i, im.id, field, msg});
    };
    if (im.id.empty()) add("id", "empty id");
    if (!(im.lat >= -90.0 && im.lat <= 90.0))
      add("lat", "latitude out of range [-90,90]");
    if (!(im.lon >= -180.0 && im.lon <= 180.0))
      add("lon", "longitude out of range [-180,180]");
    if (im.width < 1) add("width", "nonpositive width");
    if (im.height < 1) add("height", "nonpositive height");
    if (im.raster_ref.empty()) add("raster_path", "empty raster path");
    auto [it, inserted] = seen.emplace(im.id, i);
    if (!inserted && !im.id.empty())
      add("id", "duplicate id \"" + im.id + "\" (first at record " +
                    std::to_string(it->second) + ")");
  }
  return issues;
}

}  // namespace adscan
