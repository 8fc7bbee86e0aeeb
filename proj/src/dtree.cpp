#include "spchar/dtree.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "spchar/rng.hpp"

namespace spchar {

std::map<std::string, double> RegressionTree::importance_map() const {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < feature_names.size(); ++i) out[feature_names[i]] = importances[i];
  return out;
}

std::size_t RegressionTree::split_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return !n.is_leaf(); }));
}

namespace {

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
public:
  TreeBuilder(const Dataset& d, const TreeHyperparams& hp) : d_(d), hp_(hp) {
    importance_.assign(d.feature_names.size(), 0.0);
  }

  std::int32_t build(std::vector<std::size_t>& idx, std::uint32_t depth) {
    const std::size_t n = idx.size();
    double mean = 0.0;
    for (auto i : idx) mean += d_.rows[i].target;
    mean /= static_cast<double>(n);
    double sse = 0.0;
    bool constant = true;
    const double y0 = d_.rows[idx.front()].target;
    for (auto i : idx) {
      const double dy = d_.rows[i].target - mean;
      sse += dy * dy;
      constant = constant && d_.rows[i].target == y0;
    }

    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(TreeNode{-1, 0.0, -1, -1, mean, n, sse});

    const std::size_t msl = std::max<std::uint32_t>(hp_.min_samples_leaf, 1);
    if (depth >= hp_.max_depth || constant || n < 2 * msl) return id;

    const Split best = best_split(idx, mean, msl);
    if (best.feature < 0 || !(best.gain > 0.0) || best.gain < hp_.min_gain) return id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) (d_.rows[i].features[best.feature] <= best.threshold ? left : right).push_back(i);
    importance_[best.feature] += best.gain;
    idx.clear();
    idx.shrink_to_fit();

    nodes_[id].feature = best.feature;
    nodes_[id].threshold = best.threshold;
    const auto l = build(left, depth + 1);
    nodes_[id].left = l;
    const auto r = build(right, depth + 1);
    nodes_[id].right = r;
    return id;
  }

  RegressionTree finish() {
    RegressionTree t;
    t.feature_names = d_.feature_names;
    t.target_name = d_.target_name;
    t.hyperparams = hp_;
    t.nodes = std::move(nodes_);
    const double total = std::accumulate(importance_.begin(), importance_.end(), 0.0);
    t.importances = importance_;
    if (total > 0.0) {
      for (auto& v : t.importances) v /= total;
    }
    t.dataset_digest = d_.digest();
    return t;
  }

private:
  Split best_split(const std::vector<std::size_t>& idx, double mean, std::size_t msl) const {
    const std::size_t n = idx.size();
    Split best;
    std::vector<std::size_t> order(idx);
    std::vector<double> prefix_y(n + 1), prefix_y2(n + 1);
    for (std::size_t f = 0; f < d_.feature_names.size(); ++f) {
      auto x = [&](std::size_t i) { return d_.rows[i].features[f]; };
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x(a) != x(b) ? x(a) < x(b) : a < b;
      });
      prefix_y[0] = prefix_y2[0] = 0.0;
      for (std::size_t p = 0; p < n; ++p) {
        const double y = d_.rows[order[p]].target - mean;
        prefix_y[p + 1] = prefix_y[p] + y;
        prefix_y2[p + 1] = prefix_y2[p] + y * y;
      }
      const double sum = prefix_y[n], sum2 = prefix_y2[n];
      const double parent = sum2 - sum * sum / static_cast<double>(n);
      for (std::size_t nl = msl; nl + msl <= n; ++nl) {
        const double lo = x(order[nl - 1]), hi = x(order[nl]);
        if (lo == hi) continue;
        const double ls = prefix_y[nl], ls2 = prefix_y2[nl];
        const double rs = sum - ls, rs2 = sum2 - ls2;
        const auto nr = static_cast<double>(n - nl);
        const double sse_l = ls2 - ls * ls / static_cast<double>(nl);
        const double sse_r = rs2 - rs * rs / nr;
        const double gain = parent - sse_l - sse_r;
        if (gain > best.gain) {
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best = Split{static_cast<std::int32_t>(f), mid, gain};
        }
      }
    }
    return best;
  }

  const Dataset& d_;
  TreeHyperparams hp_;
  std::vector<TreeNode> nodes_;
  std::vector<double> importance_;
};

}  // namespace

RegressionTree fit(const Dataset& d, const TreeHyperparams& hp) {
  if (d.rows.empty()) throw TreeError("fit: empty dataset");
  d.validate();
  for (const auto& r : d.rows) {
    if (!std::isfinite(r.target)) throw TreeError("fit: non-finite target for '" + r.matrix_id + "'");
    for (double v : r.features) {
      if (!std::isfinite(v)) throw TreeError("fit: non-finite feature for '" + r.matrix_id + "'");
    }
  }
  TreeBuilder b(d, hp);
  std::vector<std::size_t> idx(d.rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  b.build(idx, 0);
  return b.finish();
}

std::size_t leaf_of(const RegressionTree& t, std::span<const double> features) {
  if (features.size() != t.feature_names.size()) {
    throw TreeError("predict: expected " + std::to_string(t.feature_names.size()) + " features, got " +
                    std::to_string(features.size()));
  }
  if (t.nodes.empty()) throw TreeError("predict: empty tree");
  std::size_t at = 0;
  while (!t.nodes[at].is_leaf()) {
    const auto& node = t.nodes[at];
    const double v = features[static_cast<std::size_t>(node.feature)];
    if (std::isnan(v)) throw TreeError("predict: missing value for feature '" + t.feature_names[node.feature] + "'");
    at = static_cast<std::size_t>(v <= node.threshold ? node.left : node.right);
  }
  return at;
}

double predict(const RegressionTree& t, std::span<const double> features) {
  return t.nodes[leaf_of(t, features)].prediction;
}

nlohmann::json tree_to_json(const RegressionTree& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"prediction", n.prediction},
                     {"samples", n.samples},
                     {"sse", n.sse}});
  }
  nlohmann::json imp = nlohmann::json::object();
  for (std::size_t i = 0; i < t.feature_names.size(); ++i) imp[t.feature_names[i]] = t.importances[i];
  return {{"spchar_schema", "spchar.model.v1"},
          {"kind", "regression_tree"},
          {"feature_names", t.feature_names},
          {"target", t.target_name},
          {"hyperparams",
           {{"max_depth", t.hyperparams.max_depth},
            {"min_samples_leaf", t.hyperparams.min_samples_leaf},
            {"min_gain", t.hyperparams.min_gain}}},
          {"nodes", nodes},
          {"importances", imp},
          {"dataset_digest", t.dataset_digest},
          {"metadata", t.metadata}};
}

RegressionTree tree_from_json(const nlohmann::json& j) {
  if (j.value("kind", std::string()) != "regression_tree") throw TreeError("model JSON: not a regression_tree");
  RegressionTree t;
  t.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  t.target_name = j.at("target").get<std::string>();
  const auto& hp = j.at("hyperparams");
  t.hyperparams.max_depth = hp.at("max_depth").get<std::uint32_t>();
  t.hyperparams.min_samples_leaf = hp.at("min_samples_leaf").get<std::uint32_t>();
  t.hyperparams.min_gain = hp.at("min_gain").get<double>();
  for (const auto& n : j.at("nodes")) {
    t.nodes.push_back(TreeNode{n.at("feature").get<std::int32_t>(), n.at("threshold").get<double>(),
                               n.at("left").get<std::int32_t>(), n.at("right").get<std::int32_t>(),
                               n.at("prediction").get<double>(), n.at("samples").get<std::uint64_t>(),
                               n.at("sse").get<double>()});
  }
  const auto n_nodes = static_cast<std::int32_t>(t.nodes.size());
  for (const auto& n : t.nodes) {
    if (n.is_leaf()) continue;
    if (n.feature >= static_cast<std::int32_t>(t.feature_names.size()) || n.left <= 0 || n.right <= 0 ||
        n.left >= n_nodes || n.right >= n_nodes) {
      throw TreeError("model JSON: malformed node references");
    }
  }
  const auto& imp = j.at("importances");
  for (const auto& f : t.feature_names) t.importances.push_back(imp.at(f).get<double>());
  t.dataset_digest = j.value("dataset_digest", std::string());
  t.metadata = j.value("metadata", nlohmann::json::object());
  if (t.nodes.empty()) throw TreeError("model JSON: no nodes");
  return t;
}

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, std::uint32_t k, std::uint64_t seed) {
  if (k < 2) throw TreeError("kfold: K must be >= 2");
  if (n < k) throw TreeError("kfold: need at least K rows");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  CounterStream rng(derive_seed(seed, n));
  for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.next_below(i + 1)]);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::uint32_t f = 0; f < k; ++f) {
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(f * n / k),
                    perm.begin() + static_cast<std::ptrdiff_t>((f + 1) * n / k));
  }
  return folds;
}

double mape(std::span<const double> predicted, std::span<const double> actual, std::size_t* zero_count) {
  if (predicted.size() != actual.size()) throw TreeError("mape: length mismatch");
  double sum = 0.0;
  std::size_t used = 0, zeros = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0.0) {
      ++zeros;
      continue;
    }
    sum += std::abs(predicted[i] - actual[i]) / std::abs(actual[i]);
    ++used;
  }
  if (zero_count) *zero_count = zeros;
  return used ? 100.0 * sum / static_cast<double>(used) : 0.0;
}

KFoldReport kfold_validate(const Dataset& d, std::uint32_t k, const TreeHyperparams& hp, std::uint64_t seed) {
  d.validate();
  KFoldReport rep;
  rep.k = k;
  rep.seed = seed;
  const auto folds = kfold_indices(d.rows.size(), k, seed);

  std::vector<double> pooled_pred, pooled_actual, rel_errors;
  double mape_sum = 0.0;
  std::size_t mape_folds = 0;
  for (const auto& held : folds) {
    std::vector<bool> is_held(d.rows.size(), false);
    for (auto i : held) is_held[i] = true;
    Dataset train;
    train.feature_names = d.feature_names;
    train.target_name = d.target_name;
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
      if (!is_held[i]) train.rows.push_back(d.rows[i]);
    }
    const RegressionTree t = fit(train, hp);
    std::vector<double> pred, actual;
    for (auto i : held) {
      pred.push_back(predict(t, d.rows[i].features));
      actual.push_back(d.rows[i].target);
      if (d.rows[i].target == 0.0) rep.zero_target_ids.push_back(d.rows[i].matrix_id);
      else rel_errors.push_back(std::abs(pred.back() - actual.back()) / std::abs(actual.back()));
    }
    FoldResult fr;
    fr.size = held.size();
    fr.mape = mape(pred, actual, &fr.zero_targets);
    if (fr.zero_targets < fr.size) {
      mape_sum += fr.mape;
      ++mape_folds;
    }
    rep.folds.push_back(fr);
    pooled_pred.insert(pooled_pred.end(), pred.begin(), pred.end());
    pooled_actual.insert(pooled_actual.end(), actual.begin(), actual.end());
  }
  rep.mean_mape = mape_folds ? mape_sum / static_cast<double>(mape_folds) : 0.0;

  const double mean = std::accumulate(pooled_actual.begin(), pooled_actual.end(), 0.0) / pooled_actual.size();
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < pooled_actual.size(); ++i) {
    sse += (pooled_pred[i] - pooled_actual[i]) * (pooled_pred[i] - pooled_actual[i]);
    sst += (pooled_actual[i] - mean) * (pooled_actual[i] - mean);
  }
  rep.r2 = sst > 0.0 ? 1.0 - sse / sst : (sse == 0.0 ? 1.0 : 0.0);

  if (!rel_errors.empty()) {
    std::sort(rel_errors.begin(), rel_errors.end());
    const std::size_t m = rel_errors.size();
    rep.median_relative_error = m % 2 ? rel_errors[m / 2] : 0.5 * (rel_errors[m / 2 - 1] + rel_errors[m / 2]);
  }
  return rep;
}

nlohmann::json kfold_to_json(const KFoldReport& r) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds) folds.push_back({{"size", f.size}, {"mape", f.mape}, {"zero_targets", f.zero_targets}});
  return {{"k", r.k},
          {"seed", r.seed},
          {"folds", folds},
          {"mean_mape", r.mean_mape},
          {"r2", r.r2},
          {"median_relative_error", r.median_relative_error},
          {"zero_target_rows", r.zero_target_ids}};
}

ImportanceReport importance_report(const std::vector<ModelEntry>& models, double min_importance) {
  ImportanceReport rep;
  rep.min_importance = min_importance;
  std::map<std::string, std::vector<std::string>> above;
  for (const auto& m : models) {
    RankedModel rm;
    rm.label = m.label();
    for (std::size_t i = 0; i < m.tree.feature_names.size(); ++i) {
      if (m.tree.importances[i] > 0.0) rm.ranked.emplace_back(m.tree.feature_names[i], m.tree.importances[i]);
      if (m.tree.importances[i] > min_importance) above[m.tree.feature_names[i]].push_back(rm.label);
    }
    std::sort(rm.ranked.begin(), rm.ranked.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    rm.empty = rm.ranked.empty();
    if (rm.empty) rep.notes.push_back(rm.label + ": single-leaf model, no importances");
    rep.models.push_back(std::move(rm));
  }
  for (auto& [feature, labels] : above) {
    if (labels.size() == models.size()) rep.common.push_back(feature);
    else rep.distinct[feature] = labels;
  }
  if (above.empty()) {
    std::ostringstream os;
    os << "no feature has importance above " << min_importance << " in any model";
    rep.notes.push_back(os.str());
  }
  return rep;
}

nlohmann::json report_to_json(const ImportanceReport& r) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : r.models) {
    nlohmann::json ranked = nlohmann::json::array();
    for (const auto& [f, v] : m.ranked) ranked.push_back({{"feature", f}, {"importance", v}});
    models.push_back({{"model", m.label}, {"ranked", ranked}, {"empty", m.empty}});
  }
  return {{"spchar_schema", "spchar.report.v1"},
          {"min_importance", r.min_importance},
          {"models", models},
          {"common", r.common},
          {"distinct", r.distinct},
          {"notes", r.notes}};
}

std::string report_to_text(const ImportanceReport& r) {
  std::ostringstream os;
  for (const auto& m : r.models) {
    os << m.label << (m.empty ? "  (empty)" : "") << '\n';
    std::size_t width = 8;
    for (const auto& [f, v] : m.ranked) width = std::max(width, f.size());
    for (const auto& [f, v] : m.ranked) {
      os << "  " << std::left << std::setw(static_cast<int>(width)) << f << "  " << std::right << std::fixed
         << std::setprecision(4) << v << std::defaultfloat << std::setprecision(6) << '\n';
    }
  }
  os << "common (> " << r.min_importance << "):";
  for (const auto& f : r.common) os << ' ' << f;
  os << '\n';
  for (const auto& [f, labels] : r.distinct) {
    os << "distinct " << f << ':';
    for (const auto& l : labels) os << ' ' << l;
    os << '\n';
  }
  for (const auto& n : r.notes) os << "note: " << n << '\n';
  return os.str();
}

}  // namespace spchar
