#include "spchar/matgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <boost/math/distributions/normal.hpp>
#include "json.hpp"

#include "spchar/rng.hpp"

namespace spchar {

namespace {

constexpr std::array<std::string_view, 9> kNames = {"row",      "column",  "cyclic",      "stride", "temporal",
                                                     "spatial", "uniform", "exponential", "normal"};

// Stream tag for draws not tied to a row (e.g. the Temporal column set).
constexpr std::uint64_t kGlobalTag = ~std::uint64_t{0};

CounterStream row_stream(std::uint64_t seed, index_t row) { return CounterStream(derive_seed(seed, row)); }

// Virtual Fisher-Yates: the first k slots of a shuffled [0, n). Slot j swaps
// with j + below(n - j); the sparse map only changes storage, not the stream.
std::vector<index_t> sample_without_replacement(CounterStream& rng, index_t n, index_t k) {
  std::vector<index_t> out(k);
  if (static_cast<std::uint64_t>(k) * 8 >= n) {
    std::vector<index_t> slots(n);
    std::iota(slots.begin(), slots.end(), 0);
    for (index_t j = 0; j < k; ++j) {
      auto r = j + static_cast<index_t>(rng.next_below(n - j));
      std::swap(slots[j], slots[r]);
      out[j] = slots[j];
    }
  } else {
    std::unordered_map<index_t, index_t> moved;
    moved.reserve(2 * static_cast<std::size_t>(k));
    auto at = [&](index_t i) {
      auto it = moved.find(i);
      return it == moved.end() ? i : it->second;
    };
    for (index_t j = 0; j < k; ++j) {
      auto r = j + static_cast<index_t>(rng.next_below(n - j));
      index_t vj = at(j), vr = at(r);
      moved[j] = vr;
      moved[r] = vj;
      out[j] = vr;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void append_row(CsrMatrix& m, const std::vector<index_t>& cols) {
  m.col_idxs.insert(m.col_idxs.end(), cols.begin(), cols.end());
  m.row_ptrs.push_back(static_cast<index_t>(m.col_idxs.size()));
}

index_t clamp_count(double x, index_t n) {
  double r = std::round(x);
  if (!(r > 0.0)) return 0;
  if (r >= static_cast<double>(n)) return n;
  return static_cast<index_t>(r);
}

void check(const GenSpec& s) {
  const auto& p = s.params;
  if (s.n < 1) throw GenError("n must be >= 1");
  switch (s.category) {
    case Category::Stride:
      if (p.stride < 1) throw GenError("stride must be >= 1");
      if (p.stride >= s.n) throw GenError("stride must be < n");
      break;
    case Category::Spatial:
      if (p.cluster_size < 1) throw GenError("cluster size must be >= 1");
      if (p.cluster_size > s.n) throw GenError("cluster size must be <= n");
      break;
    case Category::Temporal:
      if (p.temporal_row_length < 1) throw GenError("temporal row length must be >= 1");
      if (p.temporal_row_length > s.n) throw GenError("temporal row length must be <= n");
      break;
    case Category::Cyclic:
      if (p.cycle.empty()) throw GenError("cycle sequence must not be empty");
      break;
    case Category::Uniform:
    case Category::Exponential:
    case Category::Normal:
      if (!(p.mean_row_length > 0.0) || !std::isfinite(p.mean_row_length)) {
        throw GenError("mean row length must be positive and finite");
      }
      break;
    default:
      break;
  }
}

}  // namespace

std::string_view category_name(Category c) { return kNames[static_cast<std::size_t>(c)]; }

std::optional<Category> parse_category(std::string_view name) {
  std::string low(name);
  std::transform(low.begin(), low.end(), low.begin(), [](unsigned char ch) { return std::tolower(ch); });
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == low) return static_cast<Category>(i);
  }
  return std::nullopt;
}

CsrMatrix generate(const GenSpec& spec) {
  check(spec);
  const index_t n = spec.n;
  const auto& p = spec.params;

  CsrMatrix m;
  m.rows = n;
  m.cols = n;
  m.row_ptrs.clear();
  m.row_ptrs.reserve(static_cast<std::size_t>(n) + 1);
  m.row_ptrs.push_back(0);

  switch (spec.category) {
    case Category::Row: {
      std::vector<index_t> all(n);
      std::iota(all.begin(), all.end(), 0);
      append_row(m, all);
      for (index_t i = 1; i < n; ++i) append_row(m, {});
      break;
    }
    case Category::Column:
      for (index_t i = 0; i < n; ++i) append_row(m, {0});
      break;
    case Category::Cyclic:
      for (index_t i = 0; i < n; ++i) {
        auto rng = row_stream(spec.seed, i);
        index_t len = std::min(p.cycle[i % p.cycle.size()], n);
        append_row(m, sample_without_replacement(rng, n, len));
      }
      break;
    case Category::Stride: {
      std::vector<index_t> cols;
      for (std::uint64_t c = 0; c < n; c += p.stride) {
        if (p.stride_max_row_nnz && cols.size() >= p.stride_max_row_nnz) break;
        cols.push_back(static_cast<index_t>(c));
      }
      for (index_t i = 0; i < n; ++i) append_row(m, cols);
      break;
    }
    case Category::Spatial: {
      std::vector<index_t> cols(p.cluster_size);
      for (index_t i = 0; i < n; ++i) {
        auto rng = row_stream(spec.seed, i);
        auto start = static_cast<index_t>(rng.next_below(static_cast<std::uint64_t>(n) - p.cluster_size + 1));
        std::iota(cols.begin(), cols.end(), start);
        append_row(m, cols);
      }
      break;
    }
    case Category::Temporal: {
      CounterStream rng(derive_seed(spec.seed, kGlobalTag));
      auto cols = sample_without_replacement(rng, n, p.temporal_row_length);
      for (index_t i = 0; i < n; ++i) append_row(m, cols);
      break;
    }
    case Category::Uniform:
    case Category::Exponential:
    case Category::Normal: {
      const double d = p.mean_row_length;
      const boost::math::normal_distribution<double> normal(d, d / 2.0);
      for (index_t i = 0; i < n; ++i) {
        auto rng = row_stream(spec.seed, i);
        const double u = rng.next_open_unit();
        double x = 0.0;
        if (spec.category == Category::Uniform) x = 2.0 * d * u;
        else if (spec.category == Category::Exponential) x = -d * std::log1p(-u);
        else x = boost::math::quantile(normal, u);
        append_row(m, sample_without_replacement(rng, n, clamp_count(x, n)));
      }
      break;
    }
  }
  m.nnz_vals.assign(m.col_idxs.size(), 1.0f);
  return m;
}

std::uint64_t suite_subseed(std::uint64_t suite_seed, Category c, std::uint32_t replicate) {
  return derive_seed(derive_seed(suite_seed, static_cast<std::uint64_t>(c)), replicate);
}

std::vector<GeneratedMatrix> generate_suite(index_t n, std::uint64_t seed, std::uint32_t replicates,
                                            const GenParams& params, const std::vector<Category>& categories) {
  if (replicates < 1) throw GenError("replicates must be >= 1");
  std::vector<GeneratedMatrix> out;
  out.reserve(categories.size() * replicates);
  for (Category c : categories) {
    for (std::uint32_t r = 0; r < replicates; ++r) {
      GeneratedMatrix g;
      g.suite_seed = seed;
      g.replicate = r;
      g.spec = GenSpec{c, n, suite_subseed(seed, c, r), params};
      g.id = std::string(category_name(c)) + "_n" + std::to_string(n) + "_s" + std::to_string(seed) + "_r" +
             std::to_string(r);
      g.matrix = generate(g.spec);
      out.push_back(std::move(g));
    }
  }
  return out;
}

nlohmann::json generation_metadata(const GeneratedMatrix& g) {
  const auto& p = g.spec.params;
  nlohmann::json params = {{"stride", p.stride},
                           {"stride_max_row_nnz", p.stride_max_row_nnz},
                           {"cluster_size", p.cluster_size},
                           {"temporal_row_length", p.temporal_row_length},
                           {"cycle", p.cycle},
                           {"mean_row_length", p.mean_row_length}};
  return {{"spchar_schema", "spchar.matgen.v1"},
          {"matrix_id", g.id},
          {"category", category_name(g.spec.category)},
          {"n", g.spec.n},
          {"suite_seed", g.suite_seed},
          {"replicate", g.replicate},
          {"seed", g.spec.seed},
          {"params", params},
          {"generator", kRngAlgorithm},
          {"nnz", g.matrix.nnz()},
          {"digest", matrix_digest(g.matrix)}};
}

}  // namespace spchar
