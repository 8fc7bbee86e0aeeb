#include "spchar/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "spchar/digest.hpp"

namespace spchar {

void Dataset::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& r : rows) {
    if (r.features.size() != feature_names.size()) {
      throw DatasetError("dataset row '" + r.matrix_id + "' has " + std::to_string(r.features.size()) +
                         " features, expected " + std::to_string(feature_names.size()));
    }
    if (!seen.insert(r.matrix_id).second) throw DatasetError("duplicate matrix_id '" + r.matrix_id + "' in dataset");
  }
}

std::string Dataset::digest() const {
  Fnv1a64 h;
  h.text(target_name);
  h.u64(feature_names.size());
  for (const auto& f : feature_names) h.text(f);
  h.u64(rows.size());
  for (const auto& r : rows) {
    h.text(r.matrix_id);
    h.span_of<double>(r.features);
    h.f64(r.target);
  }
  return h.hex();
}

std::size_t Dataset::feature_index(const std::string& name) const {
  auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) throw DatasetError("unknown feature '" + name + "'");
  return static_cast<std::size_t>(it - feature_names.begin());
}

std::string_view target_name(Target t) {
  switch (t) {
    case Target::Gflops: return "gflops";
    case Target::Bandwidth: return "bandwidth";
    case Target::Throughput: return "throughput";
  }
  return "?";
}

std::optional<Target> parse_target(std::string_view s) {
  if (s == "gflops") return Target::Gflops;
  if (s == "bandwidth") return Target::Bandwidth;
  if (s == "throughput") return Target::Throughput;
  return std::nullopt;
}

const LeakageMap& default_leakage_map() {
  static const LeakageMap map = {
      {"gflops", {"ASE_SPEC", "VFP_SPEC", "wall_time"}},
      {"bandwidth", {"wall_time", std::string(kOpBytes)}},
      {"throughput", {"wall_time", std::string(kOpInnerIters)}},
  };
  return map;
}

LeakageResult exclude_leakage(const Dataset& d, const LeakageMap& map) {
  LeakageResult out;
  out.dataset.target_name = d.target_name;
  auto it = map.find(d.target_name);
  if (it == map.end()) {
    out.dataset = d;
    return out;
  }
  const auto& drop = it->second;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.feature_names.size(); ++i) {
    if (drop.count(d.feature_names[i])) out.removed.push_back(d.feature_names[i]);
    else keep.push_back(i);
  }
  for (auto i : keep) out.dataset.feature_names.push_back(d.feature_names[i]);
  out.dataset.rows.reserve(d.rows.size());
  for (const auto& r : d.rows) {
    DatasetRow nr{r.matrix_id, {}, r.target};
    nr.features.reserve(keep.size());
    for (auto i : keep) nr.features.push_back(r.features[i]);
    out.dataset.rows.push_back(std::move(nr));
  }
  return out;
}

Dataset build_dataset(const std::vector<MetricRecord>& metrics, const std::vector<ProfileRecord>& profiles,
                      Target target, const std::string& platform, const std::string& kernel) {
  std::unordered_map<std::string, const MetricRecord*> by_id;
  for (const auto& m : metrics) {
    if (!by_id.emplace(m.matrix_id, &m).second) throw DatasetError("duplicate matrix_id '" + m.matrix_id + "' in metrics");
  }

  std::vector<const ProfileRecord*> slice;
  std::unordered_set<std::string> seen;
  for (const auto& p : profiles) {
    if (p.platform != platform || p.kernel != kernel) continue;
    if (!by_id.count(p.matrix_id)) continue;
    if (!seen.insert(p.matrix_id).second) {
      throw DatasetError("duplicate matrix_id '" + p.matrix_id + "' in profiles for " + platform + "/" + kernel);
    }
    slice.push_back(&p);
  }
  if (slice.empty()) {
    throw DatasetError("empty join: no matrix_id shared between metrics and profiles for platform '" + platform +
                       "', kernel '" + kernel + "'");
  }

  // Counters measured on every joined row become features.
  std::set<std::string> common;
  for (const auto& [k, v] : slice.front()->counters) common.insert(k);
  for (const auto* p : slice) {
    for (auto it = common.begin(); it != common.end();) {
      it = p->counters.count(*it) ? std::next(it) : common.erase(it);
    }
  }
  for (auto id : {kOpFlops, kOpInnerIters, kOpBytes}) common.erase(std::string(id));

  const MetricRecord& first = *by_id.at(slice.front()->matrix_id);
  Dataset d;
  d.target_name = std::string(target_name(target));
  d.feature_names = {"rows", "cols", "nnz", "density", "branch_entropy", "reuse_affinity", "index_affinity"};
  std::vector<index_t> threads;
  for (const auto& [t, v] : first.thread_imbalance) {
    threads.push_back(t);
    d.feature_names.push_back("thread_imbalance_T" + std::to_string(t));
  }
  d.feature_names.push_back("wall_time");
  std::vector<std::string> counter_names;
  for (auto id : kCounterSchema) {
    if (common.count(std::string(id))) counter_names.emplace_back(id);
  }
  for (const auto& c : common) {
    if (!is_schema_counter(c)) counter_names.push_back(c);
  }
  d.feature_names.insert(d.feature_names.end(), counter_names.begin(), counter_names.end());

  for (const auto* p : slice) {
    const MetricRecord& m = *by_id.at(p->matrix_id);
    auto ops = op_counts_from_record(*p);
    if (!ops) throw DatasetError("profile for '" + p->matrix_id + "' lacks OP_FLOPS/OP_INNER_ITERS/OP_BYTES columns");
    const Targets t = derive_targets(*p, *ops);
    DatasetRow row;
    row.matrix_id = p->matrix_id;
    row.target = target == Target::Gflops ? t.gflops : target == Target::Bandwidth ? t.bandwidth_gbs : t.throughput;
    row.features = {static_cast<double>(m.rows), static_cast<double>(m.cols), static_cast<double>(m.nnz),
                    m.density, m.branch_entropy, m.reuse_affinity, m.index_affinity};
    for (index_t th : threads) {
      auto it = m.thread_imbalance.find(th);
      if (it == m.thread_imbalance.end()) throw DatasetError("metrics for '" + m.matrix_id + "' lack thread_imbalance_T" + std::to_string(th));
      row.features.push_back(it->second);
    }
    row.features.push_back(static_cast<double>(p->wall_time_ns));
    for (const auto& c : counter_names) row.features.push_back(static_cast<double>(p->counters.at(c)));
    d.rows.push_back(std::move(row));
  }
  d.validate();
  return d;
}

}  // namespace spchar
