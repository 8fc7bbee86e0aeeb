#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace spchar {

using index_t = std::uint32_t;
using value_t = float;

/// Compressed sparse row matrix.
///
/// Canonical form: row_ptrs[0] = 0, row_ptrs nondecreasing, row_ptrs[rows] =
/// nnz, every column index in [0, cols), and column indices strictly
/// increasing within each row. Indices are 32-bit and values single
/// precision, matching the element widths the kernels are modeled on.
struct CsrMatrix {
  index_t rows = 0;
  index_t cols = 0;
  std::vector<index_t> row_ptrs{0};
  std::vector<index_t> col_idxs;
  std::vector<value_t> nnz_vals;

  [[nodiscard]] std::size_t nnz() const { return col_idxs.size(); }
  [[nodiscard]] index_t row_length(index_t i) const { return row_ptrs[i + 1] - row_ptrs[i]; }

  bool operator==(const CsrMatrix&) const = default;

  /// Empty rows x cols matrix.
  static CsrMatrix zeros(index_t rows, index_t cols);
  static CsrMatrix identity(index_t n);
};

struct Triplet {
  index_t row;
  index_t col;
  value_t val;
};

struct CsrViolation {
  std::string rule;
  std::size_t index;
};

struct CsrValidation {
  std::vector<CsrViolation> violations;
  [[nodiscard]] bool ok() const { return violations.empty(); }
  [[nodiscard]] bool has(const std::string& rule) const;
  [[nodiscard]] std::string summary() const;
};

class InvalidCsr : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Every violated invariant is reported once, with the first offending index.
CsrValidation validate_csr(const CsrMatrix& m);

/// Throws InvalidCsr with the violation summary when m is not canonical.
void require_valid(const CsrMatrix& m);

/// Builds a canonical matrix; duplicate coordinates are summed in input order.
CsrMatrix from_triplets(index_t rows, index_t cols, std::vector<Triplet> entries);

/// Dense row-major materialization, intended for test oracles.
std::vector<double> to_dense(const CsrMatrix& m);

/// Re-compresses a dense row-major matrix, keeping entries that are nonzero.
CsrMatrix from_dense(index_t rows, index_t cols, const std::vector<double>& dense);

/// Content digest over dimensions, structure and value bits.
std::string matrix_digest(const CsrMatrix& m);

struct RowPartition {
  index_t thread_count = 0;
  std::vector<index_t> boundaries;
  std::vector<std::uint64_t> nnz_per_thread;
};

// Contiguous chunks of near-equal row count: the first rows % T chunks get
// one extra row. Chunks are empty when T > rows.
RowPartition partition_rows(const CsrMatrix& m, index_t thread_count);
RowPartition partition_rows(const std::vector<index_t>& row_ptrs, index_t thread_count);

}  // namespace spchar
