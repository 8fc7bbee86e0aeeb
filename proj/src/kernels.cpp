#include "spchar/kernels.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace spchar {

namespace {

std::vector<index_t> prefix_sum(const std::vector<std::uint64_t>& sizes) {
  std::vector<index_t> ptrs(sizes.size() + 1, 0);
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    acc += sizes[i];
    if (acc > std::numeric_limits<index_t>::max()) throw KernelError("output nnz exceeds 32-bit index range");
    ptrs[i + 1] = static_cast<index_t>(acc);
  }
  return ptrs;
}

void check_same_shape(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw KernelError("spadd: dimension mismatch (" + std::to_string(a.rows) + "x" + std::to_string(a.cols) + " vs " +
                      std::to_string(b.rows) + "x" + std::to_string(b.cols) + ")");
  }
}

void check_inner(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.cols != b.rows) {
    throw KernelError("spgemm: inner dimension mismatch (" + std::to_string(a.cols) + " vs " + std::to_string(b.rows) +
                      ")");
  }
}

void check_output_ptrs(const std::vector<index_t>& c_row_ptrs, index_t rows, const char* kernel) {
  if (c_row_ptrs.size() != static_cast<std::size_t>(rows) + 1 || c_row_ptrs.front() != 0) {
    throw KernelError(std::string(kernel) + ": c_row_ptrs does not match the output row count");
  }
}

unsigned workers(const ExecConfig& exec) { return std::max<unsigned>(1, exec.threads); }

CsrMatrix allocate_output(index_t rows, index_t cols, const std::vector<index_t>& c_row_ptrs) {
  CsrMatrix c;
  c.rows = rows;
  c.cols = cols;
  c.row_ptrs = c_row_ptrs;
  c.col_idxs.resize(c_row_ptrs.back());
  c.nnz_vals.resize(c_row_ptrs.back());
  return c;
}

}  // namespace

std::vector<value_t> spmv(const CsrMatrix& a, std::span<const value_t> x, const ExecConfig& exec) {
  if (x.size() != a.cols) {
    throw KernelError("spmv: x has length " + std::to_string(x.size()) + ", expected " + std::to_string(a.cols));
  }
  std::vector<value_t> y(a.rows, 0.0f);
  const auto part = partition_rows(a, workers(exec));
  parallel_partition(part, [&](index_t begin, index_t end, unsigned) {
    for (index_t i = begin; i < end; ++i) {
      value_t sum = 0.0f;
      for (index_t k = a.row_ptrs[i]; k < a.row_ptrs[i + 1]; ++k) sum += a.nnz_vals[k] * x[a.col_idxs[k]];
      y[i] = sum;
    }
  });
  return y;
}

std::vector<index_t> spadd_symbolic(const CsrMatrix& a, const CsrMatrix& b, const ExecConfig& exec) {
  check_same_shape(a, b);
  std::vector<std::uint64_t> sizes(a.rows, 0);
  parallel_batches(a.rows, exec.team_work_size, workers(exec), [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t i = begin; i < end; ++i) {
      index_t p = a.row_ptrs[i], pe = a.row_ptrs[i + 1];
      index_t q = b.row_ptrs[i], qe = b.row_ptrs[i + 1];
      std::uint64_t n = 0;
      while (p < pe && q < qe) {
        const index_t ca = a.col_idxs[p], cb = b.col_idxs[q];
        if (ca == cb) {
          ++p;
          ++q;
        } else if (ca < cb) {
          ++p;
        } else {
          ++q;
        }
        ++n;
      }
      sizes[i] = n + (pe - p) + (qe - q);
    }
  });
  return prefix_sum(sizes);
}

CsrMatrix spadd_numeric(const CsrMatrix& a, const CsrMatrix& b, const std::vector<index_t>& c_row_ptrs,
                        const ExecConfig& exec) {
  check_same_shape(a, b);
  check_output_ptrs(c_row_ptrs, a.rows, "spadd_numeric");
  CsrMatrix c = allocate_output(a.rows, a.cols, c_row_ptrs);
  parallel_batches(a.rows, exec.team_work_size, workers(exec), [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t i = begin; i < end; ++i) {
      index_t p = a.row_ptrs[i], pe = a.row_ptrs[i + 1];
      index_t q = b.row_ptrs[i], qe = b.row_ptrs[i + 1];
      index_t out = c_row_ptrs[i];
      const index_t out_end = c_row_ptrs[i + 1];
      auto emit = [&](index_t col, value_t v) {
        if (out >= out_end) throw KernelError("spadd_numeric: row " + std::to_string(i) + " overflows c_row_ptrs");
        c.col_idxs[out] = col;
        c.nnz_vals[out] = v;
        ++out;
      };
      while (p < pe && q < qe) {
        const index_t ca = a.col_idxs[p], cb = b.col_idxs[q];
        if (ca == cb) {
          emit(ca, a.nnz_vals[p++] + b.nnz_vals[q++]);
        } else if (ca < cb) {
          emit(ca, a.nnz_vals[p++]);
        } else {
          emit(cb, b.nnz_vals[q++]);
        }
      }
      while (p < pe) emit(a.col_idxs[p], a.nnz_vals[p]), ++p;
      while (q < qe) emit(b.col_idxs[q], b.nnz_vals[q]), ++q;
      if (out != out_end) throw KernelError("spadd_numeric: row " + std::to_string(i) + " is shorter than c_row_ptrs");
    }
  });
  return c;
}

CsrMatrix spadd(const CsrMatrix& a, const CsrMatrix& b, const ExecConfig& exec) {
  return spadd_numeric(a, b, spadd_symbolic(a, b, exec), exec);
}

std::vector<index_t> spgemm_symbolic(const CsrMatrix& a, const CsrMatrix& b, const ExecConfig& exec) {
  check_inner(a, b);
  std::vector<std::uint64_t> sizes(a.rows, 0);
  const unsigned w = workers(exec);
  std::vector<std::vector<index_t>> markers(w);
  parallel_batches(a.rows, exec.team_work_size, w, [&](std::size_t begin, std::size_t end, unsigned worker) {
    // marker[k] holds (row + 1) of the last row that touched column k.
    auto& marker = markers[worker];
    if (marker.empty()) marker.assign(b.cols, 0);
    for (std::size_t i = begin; i < end; ++i) {
      const auto stamp = static_cast<index_t>(i + 1);
      std::uint64_t n = 0;
      for (index_t p = a.row_ptrs[i]; p < a.row_ptrs[i + 1]; ++p) {
        const index_t j = a.col_idxs[p];
        for (index_t q = b.row_ptrs[j]; q < b.row_ptrs[j + 1]; ++q) {
          const index_t k = b.col_idxs[q];
          if (marker[k] != stamp) {
            marker[k] = stamp;
            ++n;
          }
        }
      }
      sizes[i] = n;
    }
  });
  return prefix_sum(sizes);
}

CsrMatrix spgemm_numeric(const CsrMatrix& a, const CsrMatrix& b, const std::vector<index_t>& c_row_ptrs,
                         const ExecConfig& exec) {
  check_inner(a, b);
  check_output_ptrs(c_row_ptrs, a.rows, "spgemm_numeric");
  CsrMatrix c = allocate_output(a.rows, b.cols, c_row_ptrs);
  const unsigned w = workers(exec);

  struct Accumulator {
    std::vector<index_t> marker;
    std::vector<value_t> values;
    std::vector<index_t> touched;
  };
  std::vector<Accumulator> accs(w);

  parallel_batches(a.rows, exec.team_work_size, w, [&](std::size_t begin, std::size_t end, unsigned worker) {
    auto& acc = accs[worker];
    if (acc.marker.empty()) {
      acc.marker.assign(b.cols, 0);
      acc.values.assign(b.cols, 0.0f);
    }
    for (std::size_t i = begin; i < end; ++i) {
      const auto stamp = static_cast<index_t>(i + 1);
      acc.touched.clear();
      for (index_t p = a.row_ptrs[i]; p < a.row_ptrs[i + 1]; ++p) {
        const index_t j = a.col_idxs[p];
        const value_t av = a.nnz_vals[p];
        for (index_t q = b.row_ptrs[j]; q < b.row_ptrs[j + 1]; ++q) {
          const index_t k = b.col_idxs[q];
          if (acc.marker[k] != stamp) {
            acc.marker[k] = stamp;
            acc.values[k] = 0.0f;
            acc.touched.push_back(k);
          }
          acc.values[k] += av * b.nnz_vals[q];
        }
      }
      if (acc.touched.size() != c_row_ptrs[i + 1] - c_row_ptrs[i]) {
        throw KernelError("spgemm_numeric: row " + std::to_string(i) + " size disagrees with c_row_ptrs");
      }
      std::sort(acc.touched.begin(), acc.touched.end());
      index_t out = c_row_ptrs[i];
      for (index_t k : acc.touched) {
        c.col_idxs[out] = k;
        c.nnz_vals[out] = acc.values[k];
        ++out;
      }
    }
  });
  return c;
}

CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b, const ExecConfig& exec) {
  return spgemm_numeric(a, b, spgemm_symbolic(a, b, exec), exec);
}

}  // namespace spchar
