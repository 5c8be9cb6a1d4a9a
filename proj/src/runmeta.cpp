#include "adscan/runmeta.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "adscan/types.hpp"

namespace adscan {
namespace runmeta {

namespace {

using ojson = nlohmann::ordered_json;

std::string manifest_path(const std::string& out_dir) {
  return (std::filesystem::path(out_dir) / "run-manifest.json").string();
}

ojson load_manifest(const std::string& out_dir) {
  std::ifstream in(manifest_path(out_dir));
  if (!in) {
    ojson fresh;
    fresh["stages"] = ojson::array();
    return fresh;
  }
  ojson j = ojson::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("stages"))
    throw InputError(manifest_path(out_dir) + ": malformed run manifest");
  return j;
}

}  // namespace

std::string fnv1a64_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void append_stage(const std::string& out_dir, const StageRecord& record) {
  ojson manifest = load_manifest(out_dir);
  auto& stages = manifest["stages"];

  std::string parent = "root";
  if (!stages.empty()) parent = stages.back().value("chain_hash", "root");

  std::string config_hash = fnv1a64_hex(record.config.dump());
  ojson entry;
  entry["stage"] = record.stage;
  entry["timestamp"] = record.timestamp;
  entry["inputs"] = record.inputs;
  entry["config"] = record.config;
  entry["config_hash"] = config_hash;
  entry["parent_hash"] = parent;
  entry["chain_hash"] = fnv1a64_hex(parent + config_hash + record.stage);
  ojson counts;
  for (const auto& [k, v] : record.counts) counts[k] = v;
  entry["counts"] = std::move(counts);
  stages.push_back(std::move(entry));

  std::ofstream out(manifest_path(out_dir), std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + manifest_path(out_dir));
  out << manifest.dump(2) << "\n";
}

std::optional<std::string> verify_chain(const std::string& out_dir) {
  if (!std::filesystem::exists(manifest_path(out_dir))) return std::nullopt;
  ojson manifest = load_manifest(out_dir);
  const auto& stages = manifest["stages"];
  std::string expected = "root";
  for (const auto& s : stages) {
    std::string parent = s.value("parent_hash", "");
    if (parent != expected)
      return "stage " + s.value("stage", "?") + " was produced against chain " +
             parent + " but the run directory chain is " + expected +
             "; artifacts mix different configs";
    std::string config_hash = s.value("config_hash", "");
    std::string stage = s.value("stage", "");
    std::string chain = s.value("chain_hash", "");
    if (chain != fnv1a64_hex(parent + config_hash + stage))
      return "stage " + stage + " has a tampered chain hash";
    expected = chain;
  }
  return std::nullopt;
}

bool has_stage(const std::string& out_dir, const std::string& stage) {
  if (!std::filesystem::exists(manifest_path(out_dir))) return false;
  ojson manifest = load_manifest(out_dir);
  for (const auto& s : manifest["stages"])
    if (s.value("stage", "") == stage) return true;
  return false;
}

}  // namespace runmeta
}  // namespace adscan
