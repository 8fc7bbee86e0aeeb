#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "spchar/metrics.hpp"
#include "spchar/profile.hpp"

namespace spchar {

class DatasetError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct DatasetRow {
  std::string matrix_id;
  std::vector<double> features;
  double target = 0.0;
  bool operator==(const DatasetRow&) const = default;
};

struct Dataset {
  std::vector<std::string> feature_names;
  std::string target_name;
  std::vector<DatasetRow> rows;

  /// Throws DatasetError on ragged rows or duplicate matrix ids.
  void validate() const;
  [[nodiscard]] std::string digest() const;
  [[nodiscard]] std::size_t feature_index(const std::string& name) const;
  bool operator==(const Dataset&) const = default;
};

enum class Target { Gflops, Bandwidth, Throughput };
std::string_view target_name(Target t);
std::optional<Target> parse_target(std::string_view s);

/// Columns derived from each target's inputs. The wall-time feature is named
/// "wall_time".
using LeakageMap = std::map<std::string, std::set<std::string>>;
const LeakageMap& default_leakage_map();

struct LeakageResult {
  Dataset dataset;
  std::vector<std::string> removed;
};

/// Drops the target's source columns; absent columns are ignored.
LeakageResult exclude_leakage(const Dataset& d, const LeakageMap& map = default_leakage_map());

/// Joins metric and profile records on matrix_id for one (platform, kernel)
/// slice. Features: static metrics, wall_time, then every counter present in
/// all joined profiles except the OP_* op-count columns. The target is derived
/// from wall time and the OP_* columns.
Dataset build_dataset(const std::vector<MetricRecord>& metrics, const std::vector<ProfileRecord>& profiles,
                      Target target, const std::string& platform, const std::string& kernel);

}  // namespace spchar
