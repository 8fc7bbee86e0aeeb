#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "spchar/csr.hpp"
#include "spchar/parallel.hpp"

namespace spchar {

class KernelError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// All kernels expect canonical inputs and parallelize over output rows; each
// worker writes a disjoint row range, so results do not depend on the thread
// count or schedule.

/// y = A x, single-precision accumulation in column order. Static row
/// partition across exec.threads.
std::vector<value_t> spmv(const CsrMatrix& a, std::span<const value_t> x, const ExecConfig& exec = {});

/// Prefix-summed row_ptrs of A + B (row sizes are column-set unions).
std::vector<index_t> spadd_symbolic(const CsrMatrix& a, const CsrMatrix& b, const ExecConfig& exec = {});

/// Sorted two-pointer merge per row. Matched columns are summed, unmatched
/// copied; exact-zero sums stay in the structure.
CsrMatrix spadd_numeric(const CsrMatrix& a, const CsrMatrix& b, const std::vector<index_t>& c_row_ptrs,
                        const ExecConfig& exec = {});

CsrMatrix spadd(const CsrMatrix& a, const CsrMatrix& b, const ExecConfig& exec = {});

/// Prefix-summed row_ptrs of A B, sized with a per-worker dense marker.
std::vector<index_t> spgemm_symbolic(const CsrMatrix& a, const CsrMatrix& b, const ExecConfig& exec = {});

/// Gustavson row-by-row product with a per-worker dense accumulator; output
/// rows sorted, cancellation zeros retained.
CsrMatrix spgemm_numeric(const CsrMatrix& a, const CsrMatrix& b, const std::vector<index_t>& c_row_ptrs,
                         const ExecConfig& exec = {});

CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b, const ExecConfig& exec = {});

}  // namespace spchar
