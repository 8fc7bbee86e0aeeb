#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace spchar {

struct CacheLevelConfig {
  std::uint64_t size_bytes = 0;
  std::uint32_t associativity = 1;
  std::uint32_t line_bytes = 64;

  [[nodiscard]] std::uint64_t sets() const { return size_bytes / (static_cast<std::uint64_t>(line_bytes) * associativity); }
  bool operator==(const CacheLevelConfig&) const = default;
};

/// Heuristic weights used to synthesize instruction, cycle and stall
/// counters from simulated events. Not calibrated against hardware.
struct ProxyCostModel {
  double instructions_per_access = 1.0;
  double instructions_per_branch = 1.0;
  double instructions_per_flop = 1.0;
  double base_cpi = 0.5;
  double flush_penalty_cycles = 15.0;
  // Cycles charged per miss at level i (latency of level i + 1 or memory).
  std::vector<double> miss_latency_cycles{13.0, 40.0, 300.0};
  double frequency_ghz = 2.6;
  // 2-bit counters per branch site, indexed by min(trip, entries - 1).
  std::uint32_t predictor_entries = 64;

  bool operator==(const ProxyCostModel&) const = default;
};

struct CacheConfig {
  std::vector<CacheLevelConfig> levels;
  std::string replacement = "LRU";
  ProxyCostModel cost;

  /// 64 KiB / 1 MiB / 32 MiB, 64-byte lines, 4/8/16-way.
  static CacheConfig graviton3_default();

  void validate() const;
  [[nodiscard]] std::string digest() const;
  bool operator==(const CacheConfig&) const = default;
};

nlohmann::json cache_config_to_json(const CacheConfig& c);
CacheConfig cache_config_from_json(const nlohmann::json& j);

struct LevelStats {
  std::uint64_t accesses = 0;
  std::uint64_t misses = 0;
  std::uint64_t writebacks = 0;
  bool operator==(const LevelStats&) const = default;
};

/// Multi-level set-associative LRU. A miss at level i is forwarded to level
/// i + 1 and fills every level it missed in. Stores mark L1 lines dirty; a
/// dirty eviction counts as a writeback and dirties the next level's copy.
class CacheHierarchy {
public:
  explicit CacheHierarchy(const CacheConfig& cfg);

  /// Returns the index of the level that hit, or levels() on a full miss.
  std::size_t access(std::uint64_t address, bool write = false);

  [[nodiscard]] std::size_t levels() const { return levels_.size(); }
  [[nodiscard]] const std::vector<LevelStats>& stats() const { return stats_; }

private:
  struct Level {
    std::uint64_t sets;
    std::uint32_t ways;
    std::uint32_t line_bytes;
    // Per set, ways ordered MRU first; tag 0 = invalid, otherwise line + 1.
    std::vector<std::uint64_t> tags;
    std::vector<std::uint8_t> dirty;
  };

  bool lookup(Level& level, LevelStats& st, std::uint64_t address, bool write, std::uint64_t& evicted_dirty_line);
  // A dirty line leaving level - 1 marks its copy here dirty, if resident.
  void absorb_writeback(std::size_t level, std::uint64_t tag);

  std::vector<Level> levels_;
  std::vector<LevelStats> stats_;
};

std::vector<LevelStats> simulate_cache(std::span<const std::uint64_t> trace, const CacheConfig& cfg);

}  // namespace spchar
