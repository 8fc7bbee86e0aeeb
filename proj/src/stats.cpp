#include "spchar/stats.hpp"

#include <cmath>
#include <algorithm>
#include <limits>

#include <boost/math/special_functions/beta.hpp>

namespace spchar {

double f_distribution_sf(double f, double df1, double df2) {
  if (!(df1 > 0.0) || !(df2 > 0.0)) throw StatsError("F distribution needs positive degrees of freedom");
  if (std::isinf(f)) return 0.0;
  if (!(f > 0.0)) return 1.0;
  // P(F > f) = I_{df2 / (df2 + df1 f)}(df2 / 2, df1 / 2)
  const double x = df2 / (df2 + df1 * f);
  return boost::math::ibeta(df2 / 2.0, df1 / 2.0, x);
}

AnovaResult anova_oneway(const std::vector<LabeledGroup>& groups) {
  if (groups.size() < 2) throw StatsError("anova: need at least two groups");
  std::size_t n = 0;
  double grand = 0.0;
  for (const auto& [label, values] : groups) {
    if (values.size() < 2) throw StatsError("anova: group '" + label + "' has fewer than two values");
    for (double v : values) {
      if (!std::isfinite(v)) throw StatsError("anova: non-finite value in group '" + label + "'");
      grand += v;
    }
    n += values.size();
  }
  grand /= static_cast<double>(n);

  AnovaResult r;
  for (const auto& [label, values] : groups) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    r.ss_between += static_cast<double>(values.size()) * (mean - grand) * (mean - grand);
    for (double v : values) r.ss_within += (v - mean) * (v - mean);
  }
  r.df_between = groups.size() - 1;
  r.df_within = n - groups.size();

  if (r.ss_within == 0.0) {
    // All values identical: no evidence of a group effect.
    if (r.ss_between == 0.0) return r;
    r.f_statistic = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    return r;
  }
  const double ms_between = r.ss_between / static_cast<double>(r.df_between);
  const double ms_within = r.ss_within / static_cast<double>(r.df_within);
  r.f_statistic = ms_between / ms_within;
  r.p_value = f_distribution_sf(r.f_statistic, static_cast<double>(r.df_between), static_cast<double>(r.df_within));
  return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw StatsError("pearson: length mismatch");
  if (x.size() < 2) throw StatsError("pearson: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw StatsError("pearson: zero variance");
  double r = sxy / std::sqrt(sxx * syy);
  return std::max(-1.0, std::min(1.0, r));
}

}  // namespace spchar
