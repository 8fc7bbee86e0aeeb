#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spchar/bench.hpp"
#include "spchar/cache_sim.hpp"
#include "spchar/csr.hpp"

namespace spchar {

/// PMU counter ids of the profile schema.
inline constexpr std::array<std::string_view, 14> kCounterSchema = {
    "CPU_CYCLES",      "INST_RETIRED", "STALL_FRONTEND",   "STALL_BACKEND", "VFP_SPEC",
    "ASE_SPEC",        "L2_CACHE_REFILL", "L2_CACHE_WB",   "L2_MISS_COUNT", "L3_CACHE_MISS_RD",
    "L1D_CACHE",       "MEM_ACCESS",   "BR_MIS_PRED",      "BR_RETIRED"};

bool is_schema_counter(std::string_view id);

// Extra columns carried by proxy records. L1D_CACHE_REFILL is the Arm PMU
// name for L1 data misses; the OP_* columns hold structural op counts for
// target derivation.
inline constexpr std::string_view kL1Refill = "L1D_CACHE_REFILL";
inline constexpr std::string_view kOpFlops = "OP_FLOPS";
inline constexpr std::string_view kOpInnerIters = "OP_INNER_ITERS";
inline constexpr std::string_view kOpBytes = "OP_BYTES";

struct ProfileRecord {
  std::string matrix_id;
  std::string kernel;
  std::string platform;
  // Absent counters are simply not present; zero means measured zero.
  std::map<std::string, std::uint64_t> counters;
  std::uint64_t wall_time_ns = 0;

  [[nodiscard]] std::optional<std::uint64_t> counter(std::string_view id) const;
  bool operator==(const ProfileRecord&) const = default;
};

/// Header: matrix_id, kernel, [platform,] wall_time_ns, counter columns.
/// The platform column, when present and non-empty, overrides `platform`.
/// Empty cells and perf's "<not counted>" / "<not supported>" are absent.
std::vector<ProfileRecord> ingest_perf_csv(std::istream& in, const std::string& platform);

/// Columns: matrix_id,kernel,platform,wall_time_ns, then schema counters in
/// schema order, then any other counters sorted by name.
void write_profile_csv(const std::vector<ProfileRecord>& records, std::ostream& out,
                       const std::string& preamble = {});
std::vector<std::string> profile_columns(const std::vector<ProfileRecord>& records);
std::string profile_csv_row(const ProfileRecord& r, const std::vector<std::string>& columns);

struct ProxyOptions {
  index_t threads = 1;
  index_t team_work_size = 16;
  std::string matrix_id;
};

/// Per-worker event totals of a proxy run.
struct ProxyBreakdown {
  std::vector<LevelStats> levels;
  std::uint64_t trace_length = 0;
  std::uint64_t branches = 0;
  std::uint64_t mispredicts = 0;
  std::vector<double> worker_cycles;
};

/// Replays the kernel's element-level access trace through per-worker
/// copies of the cache hierarchy and a trip-indexed 2-bit loop-exit
/// predictor, then synthesizes the schema counters from the cost model.
/// Deterministic. Platform is "proxy:<config digest>".
ProfileRecord proxy_profile(KernelId kernel, const KernelInputs& in, const CacheConfig& cfg, const ProxyOptions& opt,
                            ProxyBreakdown* breakdown = nullptr);

/// Documented trace length (total L1 accesses) of proxy_profile, from
/// structure alone:
///   SpMV   3 rows + 3 nnz(A)
///   SpADD  10 rows + 8 sums + 5 copies
///   SpGEMM 6 rows + 7 nnz(A) + 7 mults + 5 nnz(C)
std::uint64_t proxy_trace_length(KernelId kernel, const CsrMatrix& a, const CsrMatrix* b = nullptr);

std::string proxy_platform(const CacheConfig& cfg);

struct Targets {
  double gflops = 0.0;
  double bandwidth_gbs = 0.0;
  // Inner-loop iterations per second.
  double throughput = 0.0;
};

Targets derive_targets(const ProfileRecord& r, const OpCounts& ops);

/// Op counts from the OP_* columns; nullopt when any is missing.
std::optional<OpCounts> op_counts_from_record(const ProfileRecord& r);

}  // namespace spchar
