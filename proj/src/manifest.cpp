#include "spchar/manifest.hpp"

#include <ctime>

#include "spchar/digest.hpp"

namespace spchar {

std::string RunManifest::digest() const {
  Fnv1a64 h;
  h.text("spchar.manifest.v1");
  h.u64(command_line.size());
  for (const auto& a : command_line) h.text(a);
  h.u64(seeds.size());
  for (const auto& [k, v] : seeds) {
    h.text(k);
    h.u64(v);
  }
  for (const auto* m : {&config_digests, &input_digests}) {
    h.u64(m->size());
    for (const auto& [k, v] : *m) {
      h.text(k);
      h.text(v);
    }
  }
  h.text(tool_version);
  return h.hex();
}

std::string RunManifest::csv_preamble(const std::string& schema) const {
  return "spchar_schema=" + schema + " manifest=" + digest();
}

void RunManifest::stamp(const std::string& key) {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  timestamps[key] = buf;
}

nlohmann::json manifest_to_json(const RunManifest& m) {
  return {{"spchar_schema", "spchar.manifest.v1"},
          {"command_line", m.command_line},
          {"seeds", m.seeds},
          {"config_digests", m.config_digests},
          {"input_digests", m.input_digests},
          {"tool_version", m.tool_version},
          {"timestamps", m.timestamps},
          {"digest", m.digest()}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command_line = j.at("command_line").get<std::vector<std::string>>();
  m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
  m.config_digests = j.at("config_digests").get<std::map<std::string, std::string>>();
  m.input_digests = j.at("input_digests").get<std::map<std::string, std::string>>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.timestamps = j.value("timestamps", std::map<std::string, std::string>{});
  return m;
}

}  // namespace spchar
