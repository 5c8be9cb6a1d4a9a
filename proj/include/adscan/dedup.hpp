#ifndef ADSCAN_DEDUP_HPP
#define ADSCAN_DEDUP_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include "adscan/types.hpp"

namespace adscan {
namespace dedup {

inline constexpr int kDescriptorDim = 128;
inline constexpr double kEarthRadiusM = 6371000.0;

struct Descriptor {
  float x = 0.0f;  // keypoint position in crop pixels
  float y = 0.0f;
  std::array<float, kDescriptorDim> v{};  // L2-normalized
};

using DescriptorSet = std::vector<Descriptor>;

// Great-circle distance in meters.
double haversine(const LatLon& a, const LatLon& b);

// Deterministic local features: Harris corners with dominant-orientation
// gradient-histogram descriptors (4x4 spatial cells x 8 orientation bins).
// Identical crops yield identical descriptor sets; gradient-free crops and
// crops smaller than 16x16 yield none.
DescriptorSet compute_descriptors(const LabelRaster& crop);

// Mutual nearest-neighbour matches passing Lowe's ratio test in both
// directions (nearest < ratio * second-nearest).
int match_count(const DescriptorSet& a, const DescriptorSet& b, double ratio);

struct MatchEdge {
  std::string a;  // a < b lexicographically
  std::string b;
  int matches = 0;
};

struct DedupGraph {
  std::vector<std::string> nodes;               // sorted ad_ids
  std::vector<MatchEdge> edges;                 // sorted by (a, b)
  std::vector<std::vector<std::string>> components;  // each sorted; list sorted
};

// Pairs ads within cfg.distance_m (spatial bucketing, same edge set as
// exhaustive pairing), adds an edge when the match count reaches cfg.tau,
// then labels connected components. Every ad must have a descriptor entry,
// possibly empty.
DedupGraph build_dedup_graph(const std::vector<AdInstance>& ads,
                             const std::map<std::string, DescriptorSet>& descriptors,
                             const DedupConfig& cfg);

// One survivor per component: the member closest to the component's
// arithmetic-mean lat/lon, ties to the smallest ad_id. Output sorted by ad_id.
std::vector<AdInstance> select_representatives(const DedupGraph& graph,
                                               const std::vector<AdInstance>& ads);

// discarded ad_id -> representative ad_id, sorted by discarded id.
std::vector<std::pair<std::string, std::string>> duplicate_mapping(
    const DedupGraph& graph, const std::vector<AdInstance>& ads);

// Binary sidecar: u32 count, u32 dim, then rows of x, y, v[0..dim)
// as little-endian float32.
void write_descriptors(const DescriptorSet& descs, const std::string& path);
DescriptorSet read_descriptors(const std::string& path);

}  // namespace dedup
}  // namespace adscan

#endif  // ADSCAN_DEDUP_HPP
