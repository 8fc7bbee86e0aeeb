#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spchar {

class StatsError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

struct AnovaResult {
  double f_statistic = 0.0;
  double p_value = 1.0;
  std::size_t df_between = 0;
  std::size_t df_within = 0;
  double ss_between = 0.0;
  double ss_within = 0.0;
};

using LabeledGroup = std::pair<std::string, std::vector<double>>;

/// One-way ANOVA; p is the upper tail of F(df_between, df_within).
AnovaResult anova_oneway(const std::vector<LabeledGroup>& groups);

/// Upper-tail probability P(F > f) of the F distribution.
double f_distribution_sf(double f, double df1, double df2);

/// Sample Pearson correlation.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace spchar
