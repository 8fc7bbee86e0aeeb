#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "spchar/csr.hpp"
#include "spchar/parallel.hpp"

namespace spchar {

enum class KernelId { SpMV, SpADD, SpGEMM };
enum class Phase { Symbolic, Numeric, Both };

std::string_view kernel_name(KernelId k);
std::optional<KernelId> parse_kernel(std::string_view s);
std::string_view phase_name(Phase p);
std::optional<Phase> parse_phase(std::string_view s);
[[nodiscard]] inline bool is_binary(KernelId k) { return k != KernelId::SpMV; }

struct BenchConfig {
  std::uint32_t warmup_runs = 10;
  std::uint32_t measured_runs = 5;
  index_t threads = 1;
  index_t team_work_size = 16;

  void validate() const;
  [[nodiscard]] ExecConfig exec() const { return {threads, team_work_size}; }
};

/// Structural operation counts. Deterministic in the input structure.
///   SpMV:   flops 2 nnz(A), inner nnz(A),
///           bytes 8 nnz + 4 (rows + 1) + 4 nnz + 4 rows
///   SpADD:  flops = inner = sums + copies,
///           bytes = full CSR streams of A, B and C
///   SpGEMM: flops 2 mults, inner = mults = sum over a_ij of |B_j*|,
///           bytes = CSR streams of A and C + 8 mults
/// where a CSR stream is 8 nnz + 4 (rows + 1).
struct OpCounts {
  std::uint64_t flops = 0;
  std::uint64_t inner_iterations = 0;
  std::uint64_t bytes_moved = 0;
  std::uint64_t multiply_count = 0;
  std::uint64_t sum_count = 0;
  std::uint64_t copy_count = 0;
  std::uint64_t output_nnz = 0;

  bool operator==(const OpCounts&) const = default;
};

struct KernelInputs {
  const CsrMatrix& a;
  const CsrMatrix* b = nullptr;
  // SpMV operand; all ones when empty.
  std::span<const value_t> x = {};
};

struct KernelResult {
  KernelId kernel = KernelId::SpMV;
  Phase phase = Phase::Both;
  std::variant<CsrMatrix, std::vector<value_t>> output;
  std::vector<std::int64_t> timings_ns;
  OpCounts op_counts;
  BenchConfig config;
};

OpCounts count_ops(KernelId kernel, const CsrMatrix& a, const CsrMatrix* b = nullptr);

/// J untimed warmups, then K individually timed runs of the selected phase.
/// For Phase::Numeric the symbolic row_ptrs are computed once, untimed.
KernelResult run_benchmark(KernelId kernel, Phase phase, const KernelInputs& in, const BenchConfig& cfg);

nlohmann::json op_counts_to_json(const OpCounts& c);
nlohmann::json result_to_json(const KernelResult& r);

}  // namespace spchar
