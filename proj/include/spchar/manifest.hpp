#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace spchar {

// Provenance record attached to every artifact a command writes.
struct RunManifest {
  std::vector<std::string> command_line;
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> config_digests;
  std::map<std::string, std::string> input_digests;
  std::string tool_version = SPCHAR_VERSION;
  std::map<std::string, std::string> timestamps;

  // Covers everything except timestamps, so reruns reproduce it.
  [[nodiscard]] std::string digest() const;
  // "spchar_schema=<schema> manifest=<digest>", the CSV preamble body.
  [[nodiscard]] std::string csv_preamble(const std::string& schema) const;
  void stamp(const std::string& key);
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

}  // namespace spchar
