#include "spchar/profile.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "spchar/csv.hpp"

namespace spchar {

bool is_schema_counter(std::string_view id) {
  return std::find(kCounterSchema.begin(), kCounterSchema.end(), id) != kCounterSchema.end();
}

std::optional<std::uint64_t> ProfileRecord::counter(std::string_view id) const {
  auto it = counters.find(std::string(id));
  if (it == counters.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// CSV ingestion / serialization

std::vector<ProfileRecord> ingest_perf_csv(std::istream& in, const std::string& platform) {
  const CsvTable t = read_csv(in);
  auto need = [&](const char* name) {
    auto c = t.column(name);
    if (!c) throw CsvError(0, std::string("profile table lacks column ") + name);
    return *c;
  };
  const auto c_id = need("matrix_id"), c_kernel = need("kernel"), c_wall = need("wall_time_ns");
  const auto c_platform = t.column("platform");

  std::vector<std::size_t> counter_cols;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (i == c_id || i == c_kernel || i == c_wall || (c_platform && i == *c_platform)) continue;
    if (t.header[i].empty()) throw CsvError(0, "empty counter column name");
    counter_cols.push_back(i);
  }

  std::vector<ProfileRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto line = t.row_lines[r];
    ProfileRecord rec;
    rec.matrix_id = row[c_id];
    rec.kernel = row[c_kernel];
    rec.platform = (c_platform && !row[*c_platform].empty()) ? row[*c_platform] : platform;
    if (rec.matrix_id.empty()) throw CsvError(line, "empty matrix_id");
    rec.wall_time_ns = parse_u64_field(row[c_wall], line, "wall_time_ns");
    if (rec.wall_time_ns == 0) throw CsvError(line, "wall_time_ns must be positive");
    for (auto c : counter_cols) {
      const std::string& cell = row[c];
      if (cell.empty() || cell == "<not counted>" || cell == "<not supported>") continue;
      rec.counters[t.header[c]] = parse_u64_field(cell, line, t.header[c]);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<std::string> profile_columns(const std::vector<ProfileRecord>& records) {
  std::vector<std::string> cols{"matrix_id", "kernel", "platform", "wall_time_ns"};
  std::set<std::string> present, extra;
  for (const auto& r : records) {
    for (const auto& [k, v] : r.counters) {
      present.insert(k);
      if (!is_schema_counter(k)) extra.insert(k);
    }
  }
  for (auto id : kCounterSchema) {
    if (present.count(std::string(id))) cols.emplace_back(id);
  }
  cols.insert(cols.end(), extra.begin(), extra.end());
  return cols;
}

std::string profile_csv_row(const ProfileRecord& r, const std::vector<std::string>& columns) {
  std::vector<std::string> f{r.matrix_id, r.kernel, r.platform, std::to_string(r.wall_time_ns)};
  for (std::size_t i = 4; i < columns.size(); ++i) {
    auto v = r.counter(columns[i]);
    f.push_back(v ? std::to_string(*v) : std::string());
  }
  return join_csv(f);
}

void write_profile_csv(const std::vector<ProfileRecord>& records, std::ostream& out, const std::string& preamble) {
  const auto cols = profile_columns(records);
  if (!preamble.empty()) out << "# " << preamble << '\n';
  out << join_csv(cols) << '\n';
  for (const auto& r : records) out << profile_csv_row(r, cols) << '\n';
}

// ---------------------------------------------------------------------------
// Proxy profiling

namespace {

constexpr std::uint64_t kElem = 4;

class AddressSpace {
public:
  std::uint64_t alloc(std::uint64_t elements) {
    const std::uint64_t base = next_;
    next_ = (base + std::max<std::uint64_t>(elements, 1) * kElem + 4095) / 4096 * 4096 + 4096;
    return base;
  }

private:
  std::uint64_t next_ = 0x10000;
};

struct CsrRegions {
  std::uint64_t row_ptrs = 0, col_idxs = 0, vals = 0;
  void place(AddressSpace& as, std::uint64_t rows, std::uint64_t nnz) {
    row_ptrs = as.alloc(rows + 1);
    col_idxs = as.alloc(nnz);
    vals = as.alloc(nnz);
  }
};

class ProxyWorker {
public:
  ProxyWorker(const CacheConfig& cfg, std::size_t sites)
      : cache_(cfg), entries_(cfg.cost.predictor_entries), tables_(sites, std::vector<std::uint8_t>(entries_, 2)) {}

  void load(std::uint64_t base, std::uint64_t index) { touch(base + index * kElem, false); }
  void store(std::uint64_t base, std::uint64_t index) { touch(base + index * kElem, true); }
  void flops(std::uint64_t n) { flops_ += n; }

  // Replays the exit branch of a loop that ran `trip` iterations: outcome
  // "continue" at positions 0..trip-1 and "exit" at position trip, each
  // predicted by the 2-bit counter at min(position, entries - 1).
  void loop(std::size_t site, std::uint64_t trip) {
    auto& table = tables_[site];
    const std::uint64_t last = entries_ - 1;
    for (std::uint64_t k = 0; k <= trip; ++k) {
      const bool taken = k < trip;
      if (k >= last && taken) {
        // Positions past the table share the last entry; replay in bulk.
        std::uint64_t run = trip - k;
        auto& c = table[last];
        while (run > 0 && c < 3) {
          if (c < 2) ++mispredicts_;
          ++c;
          --run;
          ++branches_;
        }
        branches_ += run;
        k = trip - 1;
        continue;
      }
      auto& c = table[std::min(k, last)];
      const bool predicted = c >= 2;
      if (predicted != taken) ++mispredicts_;
      if (taken && c < 3) ++c;
      if (!taken && c > 0) --c;
      ++branches_;
    }
  }

  [[nodiscard]] const CacheHierarchy& cache() const { return cache_; }
  [[nodiscard]] std::uint64_t accesses() const { return accesses_; }
  [[nodiscard]] std::uint64_t branches() const { return branches_; }
  [[nodiscard]] std::uint64_t mispredicts() const { return mispredicts_; }
  [[nodiscard]] std::uint64_t flop_count() const { return flops_; }

private:
  void touch(std::uint64_t addr, bool write) {
    ++accesses_;
    cache_.access(addr, write);
  }

  CacheHierarchy cache_;
  std::uint64_t entries_;
  std::vector<std::vector<std::uint8_t>> tables_;
  std::uint64_t accesses_ = 0, branches_ = 0, mispredicts_ = 0, flops_ = 0;
};

// Batches of team_work_size rows, batch b handled by worker b % T.
template <class Fn>
void for_worker_batches(index_t rows, index_t grain, index_t threads, unsigned worker, Fn&& fn) {
  const std::uint64_t batches = (static_cast<std::uint64_t>(rows) + grain - 1) / grain;
  for (std::uint64_t b = worker; b < batches; b += threads) {
    const auto begin = static_cast<index_t>(b * grain);
    const auto end = static_cast<index_t>(std::min<std::uint64_t>(rows, (b + 1) * grain));
    fn(begin, end);
  }
}

void trace_spmv(const CsrMatrix& a, ProxyWorker& w, index_t begin, index_t end) {
  AddressSpace as;
  CsrRegions ra;
  ra.place(as, a.rows, a.nnz());
  const auto x = as.alloc(a.cols), y = as.alloc(a.rows);
  for (index_t i = begin; i < end; ++i) {
    w.load(ra.row_ptrs, i);
    w.load(ra.row_ptrs, i + 1);
    for (index_t k = a.row_ptrs[i]; k < a.row_ptrs[i + 1]; ++k) {
      w.load(ra.col_idxs, k);
      w.load(ra.vals, k);
      w.load(x, a.col_idxs[k]);
      w.flops(2);
    }
    w.loop(1, a.row_length(i));
    w.store(y, i);
  }
  w.loop(0, end - begin);
}

struct AddLayout {
  CsrRegions a, b, c;
};

void trace_spadd(const CsrMatrix& a, const CsrMatrix& b, std::uint64_t c_nnz, ProxyWorker& w, index_t rows_grain,
                 index_t threads, unsigned worker) {
  AddressSpace as;
  AddLayout L;
  L.a.place(as, a.rows, a.nnz());
  L.b.place(as, b.rows, b.nnz());
  L.c.place(as, a.rows, c_nnz);
  std::vector<index_t> c_ptr(static_cast<std::size_t>(a.rows) + 1, 0);
  // Output offsets are needed for numeric-phase addresses.
  for (index_t i = 0; i < a.rows; ++i) {
    index_t p = a.row_ptrs[i], pe = a.row_ptrs[i + 1], q = b.row_ptrs[i], qe = b.row_ptrs[i + 1], n = 0;
    while (p < pe && q < qe) {
      const auto ca = a.col_idxs[p], cb = b.col_idxs[q];
      p += ca <= cb;
      q += cb <= ca;
      ++n;
    }
    c_ptr[i + 1] = c_ptr[i] + n + (pe - p) + (qe - q);
  }

  // Symbolic pass.
  for_worker_batches(a.rows, rows_grain, threads, worker, [&](index_t begin, index_t end) {
    for (index_t i = begin; i < end; ++i) {
      w.load(L.a.row_ptrs, i);
      w.load(L.a.row_ptrs, i + 1);
      w.load(L.b.row_ptrs, i);
      w.load(L.b.row_ptrs, i + 1);
      index_t p = a.row_ptrs[i], pe = a.row_ptrs[i + 1], q = b.row_ptrs[i], qe = b.row_ptrs[i + 1];
      std::uint64_t steps = 0;
      while (p < pe || q < qe) {
        const bool take_a = p < pe && (q >= qe || a.col_idxs[p] <= b.col_idxs[q]);
        const bool take_b = q < qe && (p >= pe || b.col_idxs[q] <= a.col_idxs[p]);
        if (take_a) w.load(L.a.col_idxs, p++);
        if (take_b) w.load(L.b.col_idxs, q++);
        ++steps;
      }
      w.loop(1, steps);
      w.store(L.c.row_ptrs, i + 1);
    }
    w.loop(0, end - begin);
  });

  // Numeric pass.
  for_worker_batches(a.rows, rows_grain, threads, worker, [&](index_t begin, index_t end) {
    for (index_t i = begin; i < end; ++i) {
      w.load(L.c.row_ptrs, i);
      w.load(L.a.row_ptrs, i);
      w.load(L.a.row_ptrs, i + 1);
      w.load(L.b.row_ptrs, i);
      w.load(L.b.row_ptrs, i + 1);
      index_t p = a.row_ptrs[i], pe = a.row_ptrs[i + 1], q = b.row_ptrs[i], qe = b.row_ptrs[i + 1];
      std::uint64_t out = c_ptr[i], steps = 0;
      while (p < pe || q < qe) {
        const bool take_a = p < pe && (q >= qe || a.col_idxs[p] <= b.col_idxs[q]);
        const bool take_b = q < qe && (p >= pe || b.col_idxs[q] <= a.col_idxs[p]);
        if (take_a) {
          w.load(L.a.col_idxs, p);
          w.load(L.a.vals, p++);
        }
        if (take_b) {
          w.load(L.b.col_idxs, q);
          w.load(L.b.vals, q++);
        }
        w.store(L.c.col_idxs, out);
        w.store(L.c.vals, out++);
        w.flops(1);
        ++steps;
      }
      w.loop(3, steps);
    }
    w.loop(2, end - begin);
  });
}

void trace_spgemm(const CsrMatrix& a, const CsrMatrix& b, std::uint64_t c_nnz, ProxyWorker& w, index_t rows_grain,
                  index_t threads, unsigned worker) {
  AddressSpace as;
  CsrRegions ra, rb, rc;
  ra.place(as, a.rows, a.nnz());
  rb.place(as, b.rows, b.nnz());
  rc.place(as, a.rows, c_nnz);
  const auto marker_base = as.alloc(b.cols), acc_base = as.alloc(b.cols);

  std::vector<index_t> marker(b.cols, 0);
  std::vector<index_t> touched;
  std::vector<std::uint64_t> c_ptr(static_cast<std::size_t>(a.rows) + 1, 0);
  {
    std::vector<index_t> m(b.cols, 0);
    for (index_t i = 0; i < a.rows; ++i) {
      std::uint64_t n = 0;
      for (index_t p = a.row_ptrs[i]; p < a.row_ptrs[i + 1]; ++p) {
        const index_t j = a.col_idxs[p];
        for (index_t q = b.row_ptrs[j]; q < b.row_ptrs[j + 1]; ++q) {
          if (m[b.col_idxs[q]] != i + 1) {
            m[b.col_idxs[q]] = i + 1;
            ++n;
          }
        }
      }
      c_ptr[i + 1] = c_ptr[i] + n;
    }
  }

  // Symbolic pass; stamps are row + 1, numeric pass uses offset stamps.
  for_worker_batches(a.rows, rows_grain, threads, worker, [&](index_t begin, index_t end) {
    for (index_t i = begin; i < end; ++i) {
      const index_t stamp = i + 1;
      w.load(ra.row_ptrs, i);
      w.load(ra.row_ptrs, i + 1);
      for (index_t p = a.row_ptrs[i]; p < a.row_ptrs[i + 1]; ++p) {
        const index_t j = a.col_idxs[p];
        w.load(ra.col_idxs, p);
        w.load(rb.row_ptrs, j);
        w.load(rb.row_ptrs, j + 1);
        for (index_t q = b.row_ptrs[j]; q < b.row_ptrs[j + 1]; ++q) {
          const index_t k = b.col_idxs[q];
          w.load(rb.col_idxs, q);
          w.load(marker_base, k);
          if (marker[k] != stamp) {
            marker[k] = stamp;
            w.store(marker_base, k);
          }
        }
        w.loop(2, b.row_length(j));
      }
      w.loop(1, a.row_length(i));
      w.store(rc.row_ptrs, i + 1);
    }
    w.loop(0, end - begin);
  });

  std::fill(marker.begin(), marker.end(), 0);
  for_worker_batches(a.rows, rows_grain, threads, worker, [&](index_t begin, index_t end) {
    for (index_t i = begin; i < end; ++i) {
      const index_t stamp = i + 1;
      touched.clear();
      w.load(ra.row_ptrs, i);
      w.load(ra.row_ptrs, i + 1);
      w.load(rc.row_ptrs, i);
      for (index_t p = a.row_ptrs[i]; p < a.row_ptrs[i + 1]; ++p) {
        const index_t j = a.col_idxs[p];
        w.load(ra.col_idxs, p);
        w.load(ra.vals, p);
        w.load(rb.row_ptrs, j);
        w.load(rb.row_ptrs, j + 1);
        for (index_t q = b.row_ptrs[j]; q < b.row_ptrs[j + 1]; ++q) {
          const index_t k = b.col_idxs[q];
          w.load(rb.col_idxs, q);
          w.load(rb.vals, q);
          w.load(marker_base, k);
          if (marker[k] != stamp) {
            marker[k] = stamp;
            w.store(marker_base, k);
            touched.push_back(k);
          }
          w.load(acc_base, k);
          w.store(acc_base, k);
          w.flops(2);
        }
        w.loop(5, b.row_length(j));
      }
      w.loop(4, a.row_length(i));
      std::sort(touched.begin(), touched.end());
      std::uint64_t out = c_ptr[i];
      for (index_t k : touched) {
        w.load(acc_base, k);
        w.store(rc.col_idxs, out);
        w.store(rc.vals, out++);
      }
      w.loop(6, touched.size());
    }
    w.loop(3, end - begin);
  });
}

}  // namespace

std::string proxy_platform(const CacheConfig& cfg) { return "proxy:" + cfg.digest(); }

std::uint64_t proxy_trace_length(KernelId kernel, const CsrMatrix& a, const CsrMatrix* b) {
  const OpCounts ops = count_ops(kernel, a, b);
  const std::uint64_t rows = a.rows, nnz = a.nnz();
  switch (kernel) {
    case KernelId::SpMV: return 3 * rows + 3 * nnz;
    case KernelId::SpADD: return 10 * rows + 8 * ops.sum_count + 5 * ops.copy_count;
    case KernelId::SpGEMM: return 6 * rows + 7 * nnz + 7 * ops.multiply_count + 5 * ops.output_nnz;
  }
  return 0;
}

ProfileRecord proxy_profile(KernelId kernel, const KernelInputs& in, const CacheConfig& cfg, const ProxyOptions& opt,
                            ProxyBreakdown* breakdown) {
  cfg.validate();
  if (opt.threads < 1 || opt.team_work_size < 1) throw std::invalid_argument("proxy_profile: threads and team_work_size must be >= 1");
  const CsrMatrix& a = in.a;
  const OpCounts ops = count_ops(kernel, a, in.b);

  std::vector<ProxyWorker> workers;
  workers.reserve(opt.threads);
  const std::size_t sites = kernel == KernelId::SpMV ? 2 : kernel == KernelId::SpADD ? 4 : 7;
  for (index_t t = 0; t < opt.threads; ++t) workers.emplace_back(cfg, sites);

  if (kernel == KernelId::SpMV) {
    const auto part = partition_rows(a, opt.threads);
    for (index_t t = 0; t < opt.threads; ++t) trace_spmv(a, workers[t], part.boundaries[t], part.boundaries[t + 1]);
  } else {
    for (index_t t = 0; t < opt.threads; ++t) {
      if (kernel == KernelId::SpADD) trace_spadd(a, *in.b, ops.output_nnz, workers[t], opt.team_work_size, opt.threads, t);
      else trace_spgemm(a, *in.b, ops.output_nnz, workers[t], opt.team_work_size, opt.threads, t);
    }
  }

  const auto& cost = cfg.cost;
  ProxyBreakdown bd;
  bd.levels.resize(cfg.levels.size());
  double cycles = 0.0, inst = 0.0, stall_fe = 0.0, stall_be = 0.0, worst = 0.0;
  for (const auto& w : workers) {
    const auto& st = w.cache().stats();
    double be = 0.0;
    for (std::size_t l = 0; l < st.size(); ++l) {
      bd.levels[l].accesses += st[l].accesses;
      bd.levels[l].misses += st[l].misses;
      bd.levels[l].writebacks += st[l].writebacks;
      be += static_cast<double>(st[l].misses) * cost.miss_latency_cycles[l];
    }
    const double wi = cost.instructions_per_access * w.accesses() + cost.instructions_per_branch * w.branches() +
                      cost.instructions_per_flop * w.flop_count();
    const double fe = static_cast<double>(w.mispredicts()) * cost.flush_penalty_cycles;
    const double wc = wi * cost.base_cpi + fe + be;
    inst += wi;
    stall_fe += fe;
    stall_be += be;
    cycles += wc;
    worst = std::max(worst, wc);
    bd.trace_length += w.accesses();
    bd.branches += w.branches();
    bd.mispredicts += w.mispredicts();
    bd.worker_cycles.push_back(wc);
  }

  ProfileRecord r;
  r.matrix_id = opt.matrix_id;
  r.kernel = std::string(kernel_name(kernel));
  r.platform = proxy_platform(cfg);
  r.wall_time_ns = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(worst / cost.frequency_ghz)));
  auto put = [&](std::string_view id, double v) { r.counters[std::string(id)] = static_cast<std::uint64_t>(std::llround(v)); };
  put("CPU_CYCLES", cycles);
  put("INST_RETIRED", inst);
  put("STALL_FRONTEND", stall_fe);
  put("STALL_BACKEND", stall_be);
  const std::uint64_t fp_instr = kernel == KernelId::SpADD ? ops.sum_count : ops.multiply_count;
  put("VFP_SPEC", static_cast<double>(fp_instr));
  put("ASE_SPEC", 0);
  put("L1D_CACHE", static_cast<double>(bd.levels[0].accesses));
  put(kL1Refill, static_cast<double>(bd.levels[0].misses));
  put("MEM_ACCESS", static_cast<double>(bd.trace_length));
  if (bd.levels.size() >= 2) {
    put("L2_CACHE_REFILL", static_cast<double>(bd.levels[1].misses));
    put("L2_CACHE_WB", static_cast<double>(bd.levels[1].writebacks));
    put("L2_MISS_COUNT", static_cast<double>(bd.levels[1].misses));
  }
  if (bd.levels.size() >= 3) put("L3_CACHE_MISS_RD", static_cast<double>(bd.levels[2].misses));
  put("BR_MIS_PRED", static_cast<double>(bd.mispredicts));
  put("BR_RETIRED", static_cast<double>(bd.branches));
  put(kOpFlops, static_cast<double>(ops.flops));
  put(kOpInnerIters, static_cast<double>(ops.inner_iterations));
  put(kOpBytes, static_cast<double>(ops.bytes_moved));

  if (breakdown) *breakdown = std::move(bd);
  return r;
}

Targets derive_targets(const ProfileRecord& r, const OpCounts& ops) {
  if (r.wall_time_ns == 0) throw std::invalid_argument("derive_targets: wall time must be positive");
  const double seconds = static_cast<double>(r.wall_time_ns) * 1e-9;
  Targets t;
  t.gflops = static_cast<double>(ops.flops) / seconds / 1e9;
  t.bandwidth_gbs = static_cast<double>(ops.bytes_moved) / seconds / 1e9;
  t.throughput = static_cast<double>(ops.inner_iterations) / seconds;
  return t;
}

std::optional<OpCounts> op_counts_from_record(const ProfileRecord& r) {
  auto f = r.counter(kOpFlops), i = r.counter(kOpInnerIters), b = r.counter(kOpBytes);
  if (!f || !i || !b) return std::nullopt;
  OpCounts c;
  c.flops = *f;
  c.inner_iterations = *i;
  c.bytes_moved = *b;
  return c;
}

}  // namespace spchar
