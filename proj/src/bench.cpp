#include "spchar/bench.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <stdexcept>

#include "spchar/kernels.hpp"

namespace spchar {

std::string_view kernel_name(KernelId k) {
  switch (k) {
    case KernelId::SpMV: return "spmv";
    case KernelId::SpADD: return "spadd";
    case KernelId::SpGEMM: return "spgemm";
  }
  return "?";
}

std::optional<KernelId> parse_kernel(std::string_view s) {
  if (s == "spmv") return KernelId::SpMV;
  if (s == "spadd") return KernelId::SpADD;
  if (s == "spgemm") return KernelId::SpGEMM;
  return std::nullopt;
}

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::Symbolic: return "symbolic";
    case Phase::Numeric: return "numeric";
    case Phase::Both: return "both";
  }
  return "?";
}

std::optional<Phase> parse_phase(std::string_view s) {
  if (s == "symbolic") return Phase::Symbolic;
  if (s == "numeric") return Phase::Numeric;
  if (s == "both") return Phase::Both;
  return std::nullopt;
}

void BenchConfig::validate() const {
  if (measured_runs < 1) throw std::invalid_argument("bench: measured runs K must be >= 1");
  if (threads < 1) throw std::invalid_argument("bench: thread count must be >= 1");
  if (team_work_size < 1) throw std::invalid_argument("bench: team_work_size must be >= 1");
}

namespace {

std::uint64_t csr_stream_bytes(std::uint64_t rows, std::uint64_t nnz) { return 8 * nnz + 4 * (rows + 1); }

const CsrMatrix& second(KernelId k, const CsrMatrix* b) {
  if (!b) throw std::invalid_argument(std::string(kernel_name(k)) + " needs a second operand");
  return *b;
}

}  // namespace

OpCounts count_ops(KernelId kernel, const CsrMatrix& a, const CsrMatrix* b) {
  OpCounts c;
  switch (kernel) {
    case KernelId::SpMV: {
      const std::uint64_t nnz = a.nnz();
      c.flops = 2 * nnz;
      c.inner_iterations = nnz;
      c.multiply_count = nnz;
      c.output_nnz = a.rows;
      c.bytes_moved = 8 * nnz + 4 * (static_cast<std::uint64_t>(a.rows) + 1) + 4 * nnz + 4 * static_cast<std::uint64_t>(a.rows);
      break;
    }
    case KernelId::SpADD: {
      const CsrMatrix& bm = second(kernel, b);
      if (a.rows != bm.rows || a.cols != bm.cols) throw std::invalid_argument("spadd: dimension mismatch");
      for (index_t i = 0; i < a.rows; ++i) {
        index_t p = a.row_ptrs[i], pe = a.row_ptrs[i + 1], q = bm.row_ptrs[i], qe = bm.row_ptrs[i + 1];
        while (p < pe && q < qe) {
          if (a.col_idxs[p] == bm.col_idxs[q]) {
            ++c.sum_count;
            ++p;
            ++q;
          } else if (a.col_idxs[p] < bm.col_idxs[q]) {
            ++c.copy_count;
            ++p;
          } else {
            ++c.copy_count;
            ++q;
          }
        }
        c.copy_count += (pe - p) + (qe - q);
      }
      c.output_nnz = c.sum_count + c.copy_count;
      c.flops = c.sum_count + c.copy_count;
      c.inner_iterations = c.output_nnz;
      c.bytes_moved = csr_stream_bytes(a.rows, a.nnz()) + csr_stream_bytes(bm.rows, bm.nnz()) +
                      csr_stream_bytes(a.rows, c.output_nnz);
      break;
    }
    case KernelId::SpGEMM: {
      const CsrMatrix& bm = second(kernel, b);
      if (a.cols != bm.rows) throw std::invalid_argument("spgemm: inner dimension mismatch");
      std::vector<index_t> marker(bm.cols, 0);
      for (index_t i = 0; i < a.rows; ++i) {
        for (index_t p = a.row_ptrs[i]; p < a.row_ptrs[i + 1]; ++p) {
          const index_t j = a.col_idxs[p];
          c.multiply_count += bm.row_ptrs[j + 1] - bm.row_ptrs[j];
          for (index_t q = bm.row_ptrs[j]; q < bm.row_ptrs[j + 1]; ++q) {
            if (marker[bm.col_idxs[q]] != i + 1) {
              marker[bm.col_idxs[q]] = i + 1;
              ++c.output_nnz;
            }
          }
        }
      }
      c.flops = 2 * c.multiply_count;
      c.inner_iterations = c.multiply_count;
      c.bytes_moved = csr_stream_bytes(a.rows, a.nnz()) + csr_stream_bytes(a.rows, c.output_nnz) + 8 * c.multiply_count;
      break;
    }
  }
  return c;
}

KernelResult run_benchmark(KernelId kernel, Phase phase, const KernelInputs& in, const BenchConfig& cfg) {
  cfg.validate();
  const ExecConfig exec = cfg.exec();
  if (kernel == KernelId::SpMV && phase != Phase::Both) {
    throw std::invalid_argument("spmv has no symbolic/numeric split; use phase 'both'");
  }

  KernelResult r;
  r.kernel = kernel;
  r.phase = phase;
  r.config = cfg;
  r.op_counts = count_ops(kernel, in.a, in.b);

  std::vector<value_t> ones;
  std::span<const value_t> x = in.x;
  if (kernel == KernelId::SpMV && x.empty()) {
    ones.assign(in.a.cols, 1.0f);
    x = ones;
  }

  using Clock = std::chrono::steady_clock;
  std::function<void()> run;
  std::vector<index_t> symbolic;
  switch (kernel) {
    case KernelId::SpMV:
      run = [&] { r.output = spmv(in.a, x, exec); };
      break;
    case KernelId::SpADD: {
      const CsrMatrix& b = *in.b;
      if (phase == Phase::Symbolic) run = [&] { symbolic = spadd_symbolic(in.a, b, exec); };
      else if (phase == Phase::Numeric) {
        symbolic = spadd_symbolic(in.a, b, exec);
        run = [&] { r.output = spadd_numeric(in.a, b, symbolic, exec); };
      } else run = [&] { r.output = spadd(in.a, b, exec); };
      break;
    }
    case KernelId::SpGEMM: {
      const CsrMatrix& b = *in.b;
      if (phase == Phase::Symbolic) run = [&] { symbolic = spgemm_symbolic(in.a, b, exec); };
      else if (phase == Phase::Numeric) {
        symbolic = spgemm_symbolic(in.a, b, exec);
        run = [&] { r.output = spgemm_numeric(in.a, b, symbolic, exec); };
      } else run = [&] { r.output = spgemm(in.a, b, exec); };
      break;
    }
  }

  for (std::uint32_t i = 0; i < cfg.warmup_runs; ++i) run();
  r.timings_ns.reserve(cfg.measured_runs);
  for (std::uint32_t i = 0; i < cfg.measured_runs; ++i) {
    const auto t0 = Clock::now();
    run();
    const auto t1 = Clock::now();
    r.timings_ns.push_back(std::max<std::int64_t>(1, std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()));
  }

  // Symbolic-only runs still report the full product as output.
  if (phase == Phase::Symbolic) {
    r.output = kernel == KernelId::SpADD ? spadd_numeric(in.a, *in.b, symbolic, exec)
                                         : spgemm_numeric(in.a, *in.b, symbolic, exec);
  }
  return r;
}

nlohmann::json op_counts_to_json(const OpCounts& c) {
  return {{"flops", c.flops},
          {"inner_iterations", c.inner_iterations},
          {"bytes_moved", c.bytes_moved},
          {"multiply_count", c.multiply_count},
          {"sum_count", c.sum_count},
          {"copy_count", c.copy_count},
          {"output_nnz", c.output_nnz}};
}

nlohmann::json result_to_json(const KernelResult& r) {
  nlohmann::json out = {{"spchar_schema", "spchar.kernel_result.v1"},
                        {"kernel", kernel_name(r.kernel)},
                        {"phase", phase_name(r.phase)},
                        {"warmup_runs", r.config.warmup_runs},
                        {"measured_runs", r.config.measured_runs},
                        {"threads", r.config.threads},
                        {"team_work_size", r.config.team_work_size},
                        {"timings_ns", r.timings_ns},
                        {"op_counts", op_counts_to_json(r.op_counts)}};
  if (const auto* m = std::get_if<CsrMatrix>(&r.output)) {
    out["output"] = {{"rows", m->rows}, {"cols", m->cols}, {"nnz", m->nnz()}, {"digest", matrix_digest(*m)}};
  } else if (const auto* y = std::get_if<std::vector<value_t>>(&r.output)) {
    out["output"] = {{"length", y->size()}};
  }
  return out;
}

}  // namespace spchar
