#ifndef ADSCAN_RUNMETA_HPP
#define ADSCAN_RUNMETA_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

namespace adscan {
namespace runmeta {

std::string fnv1a64_hex(const std::string& data);

struct StageRecord {
  std::string stage;
  std::string timestamp;  // only non-deterministic field in a run dir
  nlohmann::ordered_json inputs;
  nlohmann::ordered_json config;
  std::map<std::string, std::int64_t> counts;
};

// Appends a record to <out_dir>/run-manifest.json. Each record carries
// config_hash = fnv1a(config), parent_hash = previous record's chain_hash
// (or "root"), and chain_hash = fnv1a(parent + config_hash + stage).
void append_stage(const std::string& out_dir, const StageRecord& record);

// Checks that the recorded chain is linear: every record's parent_hash equals
// its predecessor's chain_hash. Returns the problem description, if any.
std::optional<std::string> verify_chain(const std::string& out_dir);

bool has_stage(const std::string& out_dir, const std::string& stage);

}  // namespace runmeta
}  // namespace adscan

#endif  // ADSCAN_RUNMETA_HPP
