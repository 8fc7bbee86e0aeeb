#include "spchar/csr.hpp"

#include <algorithm>
#include <sstream>

#include "spchar/digest.hpp"

namespace spchar {

CsrMatrix CsrMatrix::zeros(index_t rows, index_t cols) {
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptrs.assign(static_cast<std::size_t>(rows) + 1, 0);
  return m;
}

CsrMatrix CsrMatrix::identity(index_t n) {
  CsrMatrix m = zeros(n, n);
  m.col_idxs.resize(n);
  m.nnz_vals.assign(n, 1.0f);
  for (index_t i = 0; i < n; ++i) {
    m.row_ptrs[i + 1] = i + 1;
    m.col_idxs[i] = i;
  }
  return m;
}

bool CsrValidation::has(const std::string& rule) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const CsrViolation& v) { return v.rule == rule; });
}

std::string CsrValidation::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].rule << " at index " << violations[i].index;
  }
  return os.str();
}

CsrValidation validate_csr(const CsrMatrix& m) {
  CsrValidation out;
  auto flag = [&](const char* rule, std::size_t idx) { out.violations.push_back({rule, idx}); };

  const std::size_t nnz = m.col_idxs.size();
  if (m.nnz_vals.size() != nnz) flag("col_idxs and nnz_vals equal length", std::min(nnz, m.nnz_vals.size()));

  const std::size_t expect_ptrs = static_cast<std::size_t>(m.rows) + 1;
  if (m.row_ptrs.size() != expect_ptrs) {
    flag("row_ptrs length rows+1", std::min(expect_ptrs, m.row_ptrs.size()));
  }
  if (m.row_ptrs.empty()) return out;

  if (m.row_ptrs.front() != 0) flag("row_ptrs[0] = 0", 0);

  bool monotone = true;
  for (std::size_t i = 1; i < m.row_ptrs.size(); ++i) {
    if (m.row_ptrs[i] < m.row_ptrs[i - 1]) {
      flag("row_ptrs nondecreasing", i);
      monotone = false;
      break;
    }
  }
  if (m.row_ptrs.back() != nnz) flag("row_ptrs[rows] = nnz", m.row_ptrs.size() - 1);

  for (std::size_t k = 0; k < nnz; ++k) {
    if (m.col_idxs[k] >= m.cols) {
      flag("col_idxs in [0, cols)", k);
      break;
    }
  }

  // Row-wise ordering is only meaningful when the row extents are sane.
  if (monotone && m.row_ptrs.back() <= nnz) {
    bool found = false;
    for (std::size_t i = 0; i + 1 < m.row_ptrs.size() && !found; ++i) {
      for (std::size_t k = m.row_ptrs[i] + 1; k < m.row_ptrs[i + 1]; ++k) {
        if (m.col_idxs[k] <= m.col_idxs[k - 1]) {
          flag("strictly increasing within row", k);
          found = true;
          break;
        }
      }
    }
  }
  return out;
}

void require_valid(const CsrMatrix& m) {
  auto v = validate_csr(m);
  if (!v.ok()) throw InvalidCsr("invalid CSR matrix: " + v.summary());
}

CsrMatrix from_triplets(index_t rows, index_t cols, std::vector<Triplet> entries) {
  for (const auto& t : entries) {
    if (t.row >= rows || t.col >= cols) throw InvalidCsr("triplet coordinate out of range");
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  CsrMatrix m = CsrMatrix::zeros(rows, cols);
  m.col_idxs.reserve(entries.size());
  m.nnz_vals.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& t = entries[k];
    if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
      m.nnz_vals.back() += t.val;
      continue;
    }
    m.col_idxs.push_back(t.col);
    m.nnz_vals.push_back(t.val);
    m.row_ptrs[t.row + 1]++;
  }
  for (index_t i = 0; i < rows; ++i) m.row_ptrs[i + 1] += m.row_ptrs[i];
  return m;
}

std::vector<double> to_dense(const CsrMatrix& m) {
  std::vector<double> dense(static_cast<std::size_t>(m.rows) * m.cols, 0.0);
  for (index_t i = 0; i < m.rows; ++i) {
    for (index_t k = m.row_ptrs[i]; k < m.row_ptrs[i + 1]; ++k) {
      dense[static_cast<std::size_t>(i) * m.cols + m.col_idxs[k]] = m.nnz_vals[k];
    }
  }
  return dense;
}

CsrMatrix from_dense(index_t rows, index_t cols, const std::vector<double>& dense) {
  if (dense.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("from_dense: buffer size does not match dimensions");
  }
  CsrMatrix m = CsrMatrix::zeros(rows, cols);
  for (index_t i = 0; i < rows; ++i) {
    for (index_t j = 0; j < cols; ++j) {
      double v = dense[static_cast<std::size_t>(i) * cols + j];
      if (v != 0.0) {
        m.col_idxs.push_back(j);
        m.nnz_vals.push_back(static_cast<value_t>(v));
      }
    }
    m.row_ptrs[i + 1] = static_cast<index_t>(m.col_idxs.size());
  }
  return m;
}

std::string matrix_digest(const CsrMatrix& m) {
  Fnv1a64 h;
  h.u32(m.rows);
  h.u32(m.cols);
  h.span_of<index_t>(m.row_ptrs);
  h.span_of<index_t>(m.col_idxs);
  h.span_of<value_t>(m.nnz_vals);
  return h.hex();
}

RowPartition partition_rows(const std::vector<index_t>& row_ptrs, index_t thread_count) {
  if (thread_count == 0) throw std::invalid_argument("partition_rows: thread count must be >= 1");
  if (row_ptrs.empty()) throw std::invalid_argument("partition_rows: empty row_ptrs");
  const index_t rows = static_cast<index_t>(row_ptrs.size() - 1);

  RowPartition p;
  p.thread_count = thread_count;
  p.boundaries.resize(static_cast<std::size_t>(thread_count) + 1);
  p.nnz_per_thread.resize(thread_count);

  const index_t base = rows / thread_count;
  const index_t extra = rows % thread_count;
  index_t at = 0;
  p.boundaries[0] = 0;
  for (index_t t = 0; t < thread_count; ++t) {
    at += base + (t < extra ? 1 : 0);
    p.boundaries[t + 1] = at;
    p.nnz_per_thread[t] = row_ptrs[p.boundaries[t + 1]] - row_ptrs[p.boundaries[t]];
  }
  return p;
}

RowPartition partition_rows(const CsrMatrix& m, index_t thread_count) {
  return partition_rows(m.row_ptrs, thread_count);
}

}  // namespace spchar
