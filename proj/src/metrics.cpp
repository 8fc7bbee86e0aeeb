#include "spchar/metrics.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "spchar/csv.hpp"

namespace spchar {

namespace {

class Fenwick {
public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
  void add(std::size_t i, int delta) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }
  // Sum over [0, i).
  [[nodiscard]] std::int64_t prefix(std::size_t i) const {
    std::int64_t s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

private:
  std::vector<std::int64_t> tree_;
};

}  // namespace

double branch_entropy(const CsrMatrix& m) {
  if (m.rows == 0) throw MetricError("branch_entropy: matrix has no rows");
  std::map<index_t, std::uint64_t> lengths;
  for (index_t i = 0; i < m.rows; ++i) lengths[m.row_length(i)]++;
  if (lengths.size() == 1) return 0.0;
  const double total = m.rows;
  double e = 0.0;
  for (const auto& [len, count] : lengths) {
    const double p = static_cast<double>(count) / total;
    e -= p * std::log(p);
  }
  return e / std::log(static_cast<double>(lengths.size()));
}

std::vector<std::int64_t> reuse_distances(const CsrMatrix& m) {
  const std::size_t trace_len = m.nnz();
  std::vector<std::int64_t> out(trace_len, kColdAccess);
  std::vector<std::int64_t> last(m.cols, -1);
  Fenwick live(trace_len);
  for (std::size_t t = 0; t < trace_len; ++t) {
    const index_t c = m.col_idxs[t];
    const std::int64_t prev = last[c];
    if (prev >= 0) {
      out[t] = live.prefix(t) - live.prefix(static_cast<std::size_t>(prev) + 1);
      live.add(static_cast<std::size_t>(prev), -1);
    }
    live.add(t, 1);
    last[c] = static_cast<std::int64_t>(t);
  }
  return out;
}

double log_affinity(double distance) { return 1.0 / std::log10(10.0 + distance); }

double reuse_affinity(const CsrMatrix& m) {
  if (m.nnz() == 0) throw MetricError("reuse_affinity: matrix has no nonzeros");
  double sum = 0.0;
  std::uint64_t warm = 0;
  for (std::int64_t d : reuse_distances(m)) {
    if (d == kColdAccess) continue;
    sum += log_affinity(static_cast<double>(d));
    ++warm;
  }
  return warm ? sum / static_cast<double>(warm) : 0.0;
}

double index_affinity(const CsrMatrix& m) {
  if (m.nnz() < 2) throw MetricError("index_affinity: need at least two nonzeros");
  double sum = 0.0;
  for (std::size_t k = 1; k < m.nnz(); ++k) {
    const auto a = m.col_idxs[k - 1], b = m.col_idxs[k];
    sum += log_affinity(static_cast<double>(a > b ? a - b : b - a));
  }
  return sum / static_cast<double>(m.nnz() - 1);
}

double thread_imbalance(const CsrMatrix& m, index_t thread_count) {
  if (thread_count == 0) throw MetricError("thread_imbalance: thread count must be >= 1");
  if (m.nnz() == 0) throw MetricError("thread_imbalance: undefined for a matrix without nonzeros");
  const auto part = partition_rows(m, thread_count);
  const double ideal = static_cast<double>(m.nnz()) / thread_count;
  double sum = 0.0;
  for (auto assigned : part.nnz_per_thread) sum += std::abs(static_cast<double>(assigned) - ideal) / ideal;
  return sum / thread_count;
}

MetricRecord analyze(const CsrMatrix& m, const std::vector<index_t>& thread_counts, std::string matrix_id,
                     std::optional<std::string> category) {
  require_valid(m);
  MetricRecord r;
  r.matrix_id = std::move(matrix_id);
  r.rows = m.rows;
  r.cols = m.cols;
  r.nnz = m.nnz();
  r.density = static_cast<double>(m.nnz()) / (static_cast<double>(m.rows) * static_cast<double>(m.cols));
  r.branch_entropy = branch_entropy(m);
  r.reuse_affinity = reuse_affinity(m);
  r.index_affinity = index_affinity(m);
  for (index_t t : thread_counts) r.thread_imbalance[t] = thread_imbalance(m, t);
  r.category = std::move(category);
  return r;
}

std::vector<std::string> metric_columns(const std::vector<index_t>& thread_counts) {
  std::vector<std::string> cols{"matrix_id",      "rows",           "cols",          "nnz",
                                "density",        "branch_entropy", "reuse_affinity", "index_affinity"};
  for (index_t t : thread_counts) cols.push_back("thread_imbalance_T" + std::to_string(t));
  cols.push_back("category");
  return cols;
}

void write_metrics_csv(const std::vector<MetricRecord>& records, std::ostream& out, const std::string& preamble) {
  std::vector<index_t> threads;
  if (!records.empty()) {
    for (const auto& [t, v] : records.front().thread_imbalance) threads.push_back(t);
  }
  if (!preamble.empty()) out << "# " << preamble << '\n';
  out << join_csv(metric_columns(threads)) << '\n';
  for (const auto& r : records) {
    if (r.thread_imbalance.size() != threads.size()) {
      throw std::invalid_argument("write_metrics_csv: records disagree on thread counts");
    }
    std::vector<std::string> f{r.matrix_id,
                               std::to_string(r.rows),
                               std::to_string(r.cols),
                               std::to_string(r.nnz),
                               format_double(r.density),
                               format_double(r.branch_entropy),
                               format_double(r.reuse_affinity),
                               format_double(r.index_affinity)};
    for (index_t t : threads) {
      auto it = r.thread_imbalance.find(t);
      if (it == r.thread_imbalance.end()) throw std::invalid_argument("write_metrics_csv: records disagree on thread counts");
      f.push_back(format_double(it->second));
    }
    f.push_back(r.category.value_or(""));
    out << join_csv(f) << '\n';
  }
}

std::vector<MetricRecord> read_metrics_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  auto need = [&](const char* name) {
    auto c = t.column(name);
    if (!c) throw CsvError(0, std::string("metrics table lacks column ") + name);
    return *c;
  };
  const auto c_id = need("matrix_id"), c_rows = need("rows"), c_cols = need("cols"), c_nnz = need("nnz"),
             c_density = need("density"), c_entropy = need("branch_entropy"), c_reuse = need("reuse_affinity"),
             c_index = need("index_affinity");
  const auto c_cat = t.column("category");
  std::vector<std::pair<index_t, std::size_t>> imb;
  const std::string prefix = "thread_imbalance_T";
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i].rfind(prefix, 0) == 0) {
      auto n = parse_u64_field(t.header[i].substr(prefix.size()), 0, t.header[i]);
      imb.emplace_back(static_cast<index_t>(n), i);
    }
  }

  std::vector<MetricRecord> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto line = t.row_lines[r];
    MetricRecord m;
    m.matrix_id = row[c_id];
    m.rows = parse_u64_field(row[c_rows], line, "rows");
    m.cols = parse_u64_field(row[c_cols], line, "cols");
    m.nnz = parse_u64_field(row[c_nnz], line, "nnz");
    m.density = parse_double_field(row[c_density], line, "density");
    m.branch_entropy = parse_double_field(row[c_entropy], line, "branch_entropy");
    m.reuse_affinity = parse_double_field(row[c_reuse], line, "reuse_affinity");
    m.index_affinity = parse_double_field(row[c_index], line, "index_affinity");
    for (auto [threads, col] : imb) m.thread_imbalance[threads] = parse_double_field(row[col], line, t.header[col]);
    if (c_cat && !row[*c_cat].empty()) m.category = row[*c_cat];
    out.push_back(std::move(m));
  }
  return out;
}

nlohmann::json metric_to_json(const MetricRecord& r) {
  nlohmann::json j = {{"matrix_id", r.matrix_id}, {"rows", r.rows},
                      {"cols", r.cols},           {"nnz", r.nnz},
                      {"density", r.density},     {"branch_entropy", r.branch_entropy},
                      {"reuse_affinity", r.reuse_affinity}, {"index_affinity", r.index_affinity}};
  for (const auto& [t, v] : r.thread_imbalance) j["thread_imbalance_T" + std::to_string(t)] = v;
  j["category"] = r.category ? nlohmann::json(*r.category) : nlohmann::json(nullptr);
  return j;
}

MetricRecord metric_from_json(const nlohmann::json& j) {
  MetricRecord r;
  r.matrix_id = j.at("matrix_id").get<std::string>();
  r.rows = j.at("rows").get<std::uint64_t>();
  r.cols = j.at("cols").get<std::uint64_t>();
  r.nnz = j.at("nnz").get<std::uint64_t>();
  r.density = j.at("density").get<double>();
  r.branch_entropy = j.at("branch_entropy").get<double>();
  r.reuse_affinity = j.at("reuse_affinity").get<double>();
  r.index_affinity = j.at("index_affinity").get<double>();
  const std::string prefix = "thread_imbalance_T";
  for (const auto& [k, v] : j.items()) {
    if (k.rfind(prefix, 0) == 0) r.thread_imbalance[static_cast<index_t>(std::stoul(k.substr(prefix.size())))] = v.get<double>();
  }
  if (j.contains("category") && !j["category"].is_null()) r.category = j["category"].get<std::string>();
  return r;
}

}  // namespace spchar
