#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "spchar/csr.hpp"

namespace spchar {

class MetricError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Default thread counts for the imbalance metric.
inline const std::vector<index_t> kDefaultThreadCounts{2, 4, 16, 32, 48, 64, 128};

/// Normalized Shannon entropy of the row-length distribution over all rows
/// (empty rows included). 0 when only one distinct length occurs.
double branch_entropy(const CsrMatrix& m);

inline constexpr std::int64_t kColdAccess = -1;

/// Stack distance of every access in the row-major col_idxs trace: the count
/// of distinct other columns touched since the previous access to the same
/// column, or kColdAccess. O(M log M) via a Fenwick tree over last-access
/// timestamps.
std::vector<std::int64_t> reuse_distances(const CsrMatrix& m);

/// 1 / log10(10 + distance).
double log_affinity(double distance);

/// Mean log-affinity over non-cold accesses; 0 when every access is cold.
double reuse_affinity(const CsrMatrix& m);

/// Mean log-affinity of |c[k+1] - c[k]| over consecutive trace pairs,
/// row boundaries included.
double index_affinity(const CsrMatrix& m);

/// Mean relative deviation of per-thread nnz from nnz / T under static row
/// partitioning.
double thread_imbalance(const CsrMatrix& m, index_t thread_count);

struct MetricRecord {
  std::string matrix_id;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::uint64_t nnz = 0;
  double density = 0.0;
  double branch_entropy = 0.0;
  double reuse_affinity = 0.0;
  double index_affinity = 0.0;
  std::map<index_t, double> thread_imbalance;
  std::optional<std::string> category;

  bool operator==(const MetricRecord&) const = default;
};

MetricRecord analyze(const CsrMatrix& m, const std::vector<index_t>& thread_counts = kDefaultThreadCounts,
                     std::string matrix_id = {}, std::optional<std::string> category = std::nullopt);

// Serialization. Columns: matrix_id, rows, cols, nnz, density,
// branch_entropy, reuse_affinity, index_affinity, thread_imbalance_T{N}...,
// category. All records in one table must share the same thread counts.
std::vector<std::string> metric_columns(const std::vector<index_t>& thread_counts);
void write_metrics_csv(const std::vector<MetricRecord>& records, std::ostream& out,
                       const std::string& preamble = {});
std::vector<MetricRecord> read_metrics_csv(std::istream& in);
nlohmann::json metric_to_json(const MetricRecord& r);
MetricRecord metric_from_json(const nlohmann::json& j);

}  // namespace spchar
