#pragma once

// Deliberately naive reference implementations used as test oracles.
// Nothing here calls into the library's algorithms except for building
// CsrMatrix values from dense arrays.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "spchar/csr.hpp"

namespace oracle {

using spchar::CsrMatrix;
using spchar::index_t;
using spchar::value_t;

struct Dense {
  index_t rows = 0, cols = 0;
  std::vector<double> v;
  std::vector<bool> present;
  double& at(index_t i, index_t j) { return v[static_cast<std::size_t>(i) * cols + j]; }
  [[nodiscard]] double at(index_t i, index_t j) const { return v[static_cast<std::size_t>(i) * cols + j]; }
  [[nodiscard]] bool has(index_t i, index_t j) const { return present[static_cast<std::size_t>(i) * cols + j]; }
  void mark(index_t i, index_t j) { present[static_cast<std::size_t>(i) * cols + j] = true; }
};

inline Dense make_dense(index_t r, index_t c) {
  return Dense{r, c, std::vector<double>(static_cast<std::size_t>(r) * c, 0.0),
               std::vector<bool>(static_cast<std::size_t>(r) * c, false)};
}

inline Dense densify(const CsrMatrix& m) {
  Dense d = make_dense(m.rows, m.cols);
  for (index_t i = 0; i < m.rows; ++i) {
    for (index_t k = m.row_ptrs[i]; k < m.row_ptrs[i + 1]; ++k) {
      d.at(i, m.col_idxs[k]) = m.nnz_vals[k];
      d.mark(i, m.col_idxs[k]);
    }
  }
  return d;
}

// Builds a CSR matrix directly from a dense pattern, row by row.
inline CsrMatrix from_pattern(const Dense& d) {
  CsrMatrix m;
  m.rows = d.rows;
  m.cols = d.cols;
  m.row_ptrs.assign(1, 0);
  for (index_t i = 0; i < d.rows; ++i) {
    for (index_t j = 0; j < d.cols; ++j) {
      if (!d.has(i, j)) continue;
      m.col_idxs.push_back(j);
      m.nnz_vals.push_back(static_cast<value_t>(d.at(i, j)));
    }
    m.row_ptrs.push_back(static_cast<index_t>(m.col_idxs.size()));
  }
  return m;
}

// Random canonical matrix; `integral` draws small integers so sums cancel.
inline CsrMatrix random_csr(std::mt19937_64& rng, index_t rows, index_t cols, double density, bool integral = false) {
  std::bernoulli_distribution keep(density);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::uniform_int_distribution<int> ival(-3, 3);
  Dense d = make_dense(rows, cols);
  for (index_t i = 0; i < rows; ++i) {
    for (index_t j = 0; j < cols; ++j) {
      if (!keep(rng)) continue;
      d.at(i, j) = integral ? ival(rng) : static_cast<value_t>(val(rng));
      d.mark(i, j);
    }
  }
  return from_pattern(d);
}

inline CsrMatrix negate(CsrMatrix m) {
  for (auto& v : m.nnz_vals) v = -v;
  return m;
}

struct Product {
  Dense value;
  // Sum of |a_ij * b_jk| per entry, the natural scale for rounding error.
  std::vector<double> scale;
};

inline Product dense_add(const CsrMatrix& a, const CsrMatrix& b) {
  const Dense da = densify(a), db = densify(b);
  Product p{make_dense(a.rows, a.cols), std::vector<double>(da.v.size(), 0.0)};
  for (std::size_t e = 0; e < da.v.size(); ++e) {
    p.value.v[e] = da.v[e] + db.v[e];
    p.value.present[e] = da.present[e] || db.present[e];
    p.scale[e] = std::abs(da.v[e]) + std::abs(db.v[e]);
  }
  return p;
}

inline Product dense_mul(const CsrMatrix& a, const CsrMatrix& b) {
  const Dense da = densify(a), db = densify(b);
  Product p{make_dense(a.rows, b.cols), std::vector<double>(static_cast<std::size_t>(a.rows) * b.cols, 0.0)};
  for (index_t i = 0; i < a.rows; ++i) {
    for (index_t j = 0; j < a.cols; ++j) {
      if (!da.has(i, j)) continue;
      for (index_t k = 0; k < b.cols; ++k) {
        if (!db.has(j, k)) continue;
        p.value.at(i, k) += da.at(i, j) * db.at(j, k);
        p.value.mark(i, k);
        p.scale[static_cast<std::size_t>(i) * b.cols + k] += std::abs(da.at(i, j) * db.at(j, k));
      }
    }
  }
  return p;
}

inline std::vector<double> dense_spmv(const CsrMatrix& a, const std::vector<value_t>& x) {
  const Dense da = densify(a);
  std::vector<double> y(a.rows, 0.0);
  for (index_t i = 0; i < a.rows; ++i) {
    for (index_t j = 0; j < a.cols; ++j) y[i] += da.at(i, j) * x[j];
  }
  return y;
}

// Structure matches exactly and every value is within `rel` of the oracle,
// measured against max(|expected|, scale).
inline bool matches(const CsrMatrix& got, const Product& want, double rel, std::string* why = nullptr) {
  if (got.rows != want.value.rows || got.cols != want.value.cols) {
    if (why) *why = "shape";
    return false;
  }
  const Dense g = densify(got);
  for (std::size_t e = 0; e < g.v.size(); ++e) {
    if (g.present[e] != want.value.present[e]) {
      if (why) *why = "structure at flat index " + std::to_string(e);
      return false;
    }
    const double ref = std::max(std::abs(want.value.v[e]), want.scale[e]);
    if (std::abs(g.v[e] - want.value.v[e]) > rel * ref) {
      if (why) *why = "value at flat index " + std::to_string(e);
      return false;
    }
  }
  return true;
}

// Stack distance by scanning backwards with a set: O(M^2).
inline std::vector<std::int64_t> reuse_distances(const std::vector<index_t>& trace) {
  std::vector<std::int64_t> out(trace.size(), -1);
  for (std::size_t t = 0; t < trace.size(); ++t) {
    std::set<index_t> between;
    for (std::size_t s = t; s-- > 0;) {
      if (trace[s] == trace[t]) {
        out[t] = static_cast<std::int64_t>(between.size());
        break;
      }
      between.insert(trace[s]);
    }
  }
  return out;
}

inline double affinity(double d) { return 1.0 / std::log10(10.0 + d); }

inline double reuse_affinity(const std::vector<index_t>& trace) {
  double sum = 0.0;
  std::size_t warm = 0;
  for (auto d : reuse_distances(trace)) {
    if (d < 0) continue;
    sum += affinity(static_cast<double>(d));
    ++warm;
  }
  return warm ? sum / static_cast<double>(warm) : 0.0;
}

inline double index_affinity(const std::vector<index_t>& trace) {
  double sum = 0.0;
  for (std::size_t k = 1; k < trace.size(); ++k) {
    const double d = std::abs(static_cast<double>(trace[k]) - static_cast<double>(trace[k - 1]));
    sum += affinity(d);
  }
  return sum / static_cast<double>(trace.size() - 1);
}

inline double entropy(const CsrMatrix& m) {
  std::map<index_t, std::size_t> hist;
  for (index_t i = 0; i < m.rows; ++i) hist[m.row_ptrs[i + 1] - m.row_ptrs[i]]++;
  if (hist.size() == 1) return 0.0;
  double e = 0.0;
  for (const auto& [len, c] : hist) {
    const double p = static_cast<double>(c) / static_cast<double>(m.rows);
    e -= p * std::log(p);
  }
  return e / std::log(static_cast<double>(hist.size()));
}

// Chunk sizes computed by handing out rows one at a time, round robin over
// chunk slots, then laying the chunks out contiguously.
inline double imbalance(const CsrMatrix& m, index_t t) {
  std::vector<index_t> sizes(t, 0);
  for (index_t r = 0; r < m.rows; ++r) sizes[r % t]++;
  const double ideal = static_cast<double>(m.col_idxs.size()) / t;
  double sum = 0.0;
  index_t row = 0;
  for (index_t w = 0; w < t; ++w) {
    std::uint64_t nnz = 0;
    for (index_t k = 0; k < sizes[w]; ++k, ++row) nnz += m.row_ptrs[row + 1] - m.row_ptrs[row];
    sum += std::abs(static_cast<double>(nnz) - ideal) / ideal;
  }
  return sum / t;
}

}  // namespace oracle
