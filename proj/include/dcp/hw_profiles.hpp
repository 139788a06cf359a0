#pragma once

// Named hardware profiles. Built-in presets can be extended or overridden by
// JSON files: {"profiles": {"<name>": {<HwConfig fields>}, ...}}. The
// DCP_HW_PROFILES environment variable may name a directory of such files.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "dcp/errors.hpp"
#include "dcp/types.hpp"

namespace dcp {

/// Eyeriss-like accelerator: 168 PEs and 108KB on chip, split into a 64KB
/// global L2, 43KB of L1 and 1KB of L0 spread over 12 nominal clusters.
inline HwConfig eyeriss_preset(std::int64_t pes = 168) {
  HwConfig hw;
  hw.name = pes == 168 ? "eyeriss168" : "eyeriss" + std::to_string(pes);
  hw.pe_total = pes;
  hw.l2_bytes = 64 * 1024;
  hw.l1_bytes = 43 * 1024 / 12;
  hw.l0_bytes = 1024 / 12;
  hw.bytes_per_element = 2;
  hw.bandwidth = {16.0, 64.0, 256.0};
  hw.energy_per_access = {200.0, 6.0, 2.0};
  hw.energy_per_mac = 1.0;
  hw.clock_hz = 200e6;
  return hw;
}

inline void to_json(nlohmann::json& j, const HwConfig& hw) {
  j = nlohmann::json{{"pe_total", hw.pe_total},
                     {"l2_bytes", hw.l2_bytes},
                     {"l1_bytes", hw.l1_bytes},
                     {"l0_bytes", hw.l0_bytes},
                     {"bytes_per_element", hw.bytes_per_element},
                     {"bandwidth", hw.bandwidth},
                     {"energy_per_access", hw.energy_per_access},
                     {"energy_per_mac", hw.energy_per_mac},
                     {"clock_hz", hw.clock_hz}};
}

/// Missing fields keep the value of `base`.
inline HwConfig hw_from_json(const nlohmann::json& j, const std::string& name,
                             const HwConfig& base = eyeriss_preset()) {
  HwConfig hw = base;
  hw.name = name;
  try {
    hw.pe_total = j.value("pe_total", hw.pe_total);
    hw.l2_bytes = j.value("l2_bytes", hw.l2_bytes);
    hw.l1_bytes = j.value("l1_bytes", hw.l1_bytes);
    hw.l0_bytes = j.value("l0_bytes", hw.l0_bytes);
    hw.bytes_per_element = j.value("bytes_per_element", hw.bytes_per_element);
    hw.bandwidth = j.value("bandwidth", hw.bandwidth);
    hw.energy_per_access = j.value("energy_per_access", hw.energy_per_access);
    hw.energy_per_mac = j.value("energy_per_mac", hw.energy_per_mac);
    hw.clock_hz = j.value("clock_hz", hw.clock_hz);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("profile '" + name + "': " + e.what());
  }
  hw.check();
  return hw;
}

class HwRegistry {
 public:
  HwRegistry() {
    add(eyeriss_preset(168));
    add(eyeriss_preset(256));
  }

  /// Built-ins plus every *.json file in $DCP_HW_PROFILES (sorted by name).
  static HwRegistry with_environment() {
    HwRegistry reg;
    if (const char* dir = std::getenv("DCP_HW_PROFILES"); dir && *dir) reg.load_directory(dir);
    return reg;
  }

  void add(HwConfig hw) {
    hw.check();
    profiles_[hw.name] = std::move(hw);
  }

  void load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open profile file " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
    if (!j.contains("profiles") || !j["profiles"].is_object())
      throw ConfigError(path.string() + ": missing \"profiles\" object");
    for (const auto& [name, body] : j["profiles"].items()) {
      const auto it = profiles_.find(name);
      add(hw_from_json(body, name, it != profiles_.end() ? it->second : eyeriss_preset()));
    }
  }

  void load_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) load_file(f);
  }

  const HwConfig& get(const std::string& name) const {
    const auto it = profiles_.find(name);
    if (it == profiles_.end()) throw ConfigError("unknown hardware profile '" + name + "'");
    return it->second;
  }

  bool contains(const std::string& name) const { return profiles_.count(name) != 0; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [n, _] : profiles_) out.push_back(n);
    return out;
  }

 private:
  std::map<std::string, HwConfig> profiles_;
};

}  // namespace dcp
