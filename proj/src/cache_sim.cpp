#include "spchar/cache_sim.hpp"

#include <stdexcept>

#include "spchar/digest.hpp"

namespace spchar {

CacheConfig CacheConfig::graviton3_default() {
  CacheConfig c;
  c.levels = {{64ULL << 10, 4, 64}, {1ULL << 20, 8, 64}, {32ULL << 20, 16, 64}};
  return c;
}

void CacheConfig::validate() const {
  if (levels.empty()) throw std::invalid_argument("cache config: at least one level required");
  if (replacement != "LRU") throw std::invalid_argument("cache config: only LRU replacement is supported");
  const auto line = levels.front().line_bytes;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& l = levels[i];
    const std::string where = "cache config level " + std::to_string(i + 1) + ": ";
    if (l.line_bytes == 0 || l.associativity == 0 || l.size_bytes == 0) throw std::invalid_argument(where + "zero geometry");
    if (l.line_bytes != line) throw std::invalid_argument(where + "line size must be uniform across levels");
    if (l.size_bytes % (static_cast<std::uint64_t>(l.line_bytes) * l.associativity) != 0) {
      throw std::invalid_argument(where + "size must be divisible by line size x associativity");
    }
  }
  if (cost.miss_latency_cycles.size() != levels.size()) {
    throw std::invalid_argument("cache config: miss_latency_cycles needs one entry per level");
  }
  if (cost.predictor_entries == 0) throw std::invalid_argument("cache config: predictor_entries must be >= 1");
  if (!(cost.frequency_ghz > 0.0)) throw std::invalid_argument("cache config: frequency_ghz must be positive");
}

nlohmann::json cache_config_to_json(const CacheConfig& c) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : c.levels) {
    levels.push_back({{"size_bytes", l.size_bytes}, {"associativity", l.associativity}, {"line_bytes", l.line_bytes}});
  }
  const auto& w = c.cost;
  return {{"spchar_schema", "spchar.cache_config.v1"},
          {"levels", levels},
          {"replacement", c.replacement},
          {"cost_model",
           {{"instructions_per_access", w.instructions_per_access},
            {"instructions_per_branch", w.instructions_per_branch},
            {"instructions_per_flop", w.instructions_per_flop},
            {"base_cpi", w.base_cpi},
            {"flush_penalty_cycles", w.flush_penalty_cycles},
            {"miss_latency_cycles", w.miss_latency_cycles},
            {"frequency_ghz", w.frequency_ghz},
            {"predictor_entries", w.predictor_entries}}}};
}

CacheConfig cache_config_from_json(const nlohmann::json& j) {
  CacheConfig c;
  c.levels.clear();
  for (const auto& l : j.at("levels")) {
    c.levels.push_back({l.at("size_bytes").get<std::uint64_t>(), l.at("associativity").get<std::uint32_t>(),
                        l.at("line_bytes").get<std::uint32_t>()});
  }
  c.replacement = j.value("replacement", std::string("LRU"));
  if (j.contains("cost_model")) {
    const auto& w = j["cost_model"];
    auto& m = c.cost;
    m.instructions_per_access = w.value("instructions_per_access", m.instructions_per_access);
    m.instructions_per_branch = w.value("instructions_per_branch", m.instructions_per_branch);
    m.instructions_per_flop = w.value("instructions_per_flop", m.instructions_per_flop);
    m.base_cpi = w.value("base_cpi", m.base_cpi);
    m.flush_penalty_cycles = w.value("flush_penalty_cycles", m.flush_penalty_cycles);
    m.miss_latency_cycles = w.value("miss_latency_cycles", m.miss_latency_cycles);
    m.frequency_ghz = w.value("frequency_ghz", m.frequency_ghz);
    m.predictor_entries = w.value("predictor_entries", m.predictor_entries);
  } else {
    // Scale the default latency table to the level count.
    c.cost.miss_latency_cycles.resize(c.levels.size(), c.cost.miss_latency_cycles.back());
  }
  c.validate();
  return c;
}

std::string CacheConfig::digest() const { return digest_text(cache_config_to_json(*this).dump()); }

CacheHierarchy::CacheHierarchy(const CacheConfig& cfg) {
  cfg.validate();
  for (const auto& l : cfg.levels) {
    Level lv{l.sets(), l.associativity, l.line_bytes, {}, {}};
    lv.tags.assign(lv.sets * lv.ways, 0);
    lv.dirty.assign(lv.sets * lv.ways, 0);
    levels_.push_back(std::move(lv));
  }
  stats_.resize(levels_.size());
}

bool CacheHierarchy::lookup(Level& level, LevelStats& st, std::uint64_t address, bool write,
                            std::uint64_t& evicted_dirty_line) {
  ++st.accesses;
  const std::uint64_t line = address / level.line_bytes;
  const std::uint64_t set = line % level.sets;
  const std::uint64_t tag = line + 1;
  std::uint64_t* tags = level.tags.data() + set * level.ways;
  std::uint8_t* dirty = level.dirty.data() + set * level.ways;

  std::uint32_t way = 0;
  while (way < level.ways && tags[way] != tag) ++way;
  const bool hit = way < level.ways;
  std::uint8_t d = write;
  if (hit) {
    d |= dirty[way];
  } else {
    ++st.misses;
    way = level.ways - 1;
    if (tags[way] != 0 && dirty[way]) {
      ++st.writebacks;
      evicted_dirty_line = tags[way];
    }
  }
  for (std::uint32_t w = way; w > 0; --w) {
    tags[w] = tags[w - 1];
    dirty[w] = dirty[w - 1];
  }
  tags[0] = tag;
  dirty[0] = d;
  return hit;
}

void CacheHierarchy::absorb_writeback(std::size_t level, std::uint64_t tag) {
  if (level >= levels_.size()) return;
  Level& lv = levels_[level];
  const std::uint64_t set = (tag - 1) % lv.sets;
  for (std::uint32_t w = 0; w < lv.ways; ++w) {
    if (lv.tags[set * lv.ways + w] == tag) {
      lv.dirty[set * lv.ways + w] = 1;
      return;
    }
  }
}

std::size_t CacheHierarchy::access(std::uint64_t address, bool write) {
  std::size_t hit_level = levels_.size();
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    std::uint64_t evicted = 0;
    // Only the first level sees the store; lower levels are filled with reads.
    const bool hit = lookup(levels_[i], stats_[i], address, write && i == 0, evicted);
    if (evicted) absorb_writeback(i + 1, evicted);
    if (hit) {
      hit_level = i;
      break;
    }
  }
  return hit_level;
}

std::vector<LevelStats> simulate_cache(std::span<const std::uint64_t> trace, const CacheConfig& cfg) {
  CacheHierarchy h(cfg);
  for (std::uint64_t a : trace) h.access(a);
  return h.stats();
}

}  // namespace spchar
