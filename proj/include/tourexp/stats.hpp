#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace tourexp {

/// One categorical labeling per observation, absorbed as fixed effects.
struct FEGroup {
  std::string name;
  std::vector<std::string> labels;  // one per observation
};

/// Regression input: named columns plus a response, optionally with
/// fixed-effect groupings.
struct DesignMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;  // column-major, same length as response
  std::vector<double> response;
  std::vector<FEGroup> fe_groups;

  void add_column(std::string name, std::vector<double> values);
  std::size_t n_obs() const { return response.size(); }
};

struct Coefficient {
  std::string name;
  double estimate = 0;
  double std_error = 0;
  double t_value = 0;
  double p_value = 0;
};

/// Classical least-squares output, one reporting shape for plain and
/// fixed-effects fits.
struct FitResult {
  std::vector<Coefficient> coefficients;
  double r_squared = 0;
  double adj_r_squared = 0;
  double residual_std_error = 0;
  double f_statistic = 0;        // NaN when undefined (e.g. intercept-only)
  double f_p_value = 0;          // NaN when f_statistic is NaN
  long n_obs = 0;
  long df_residual = 0;
  long n_params = 0;             // slopes + intercept + absorbed FE levels
  std::map<std::string, long> fe_absorbed;  // group name -> level count
  std::vector<double> residuals;
  std::vector<double> fitted;

  const Coefficient& coef(const std::string& name) const;
};

/// Ordinary least squares via column-pivoted QR. Throws NumericError when
/// the design is rank deficient (naming the collinear columns) or has too
/// few observations.
FitResult ols_fit(const DesignMatrix& design, bool intercept = true);

/// Fixed-effects least squares by within-group demeaning (alternating
/// projections for two or more groups). Slope estimates, standard errors
/// and fit statistics match the expanded dummy-variable regression.
FitResult fe_ols_fit(const DesignMatrix& design);

/// The dummy-expansion route: builds explicit FE dummy columns and runs
/// ols_fit. Exact for small problems; kept as a fallback and as the
/// cross-check for fe_ols_fit.
FitResult fe_ols_fit_dummies(const DesignMatrix& design);

struct CorrResult {
  double coefficient = 0;
  double p_value = 0;  // two-sided, t-transform with n-2 df
  long n = 0;
};

/// Product-moment correlation. Requires length >= 3 and nonzero variance
/// in both arguments.
CorrResult pearson_corr(std::span<const double> x, std::span<const double> y);

/// Rank correlation with average ranks on ties. Requires length >= 3 and
/// at least two distinct values in each argument.
CorrResult spearman_corr(std::span<const double> x, std::span<const double> y);

/// Mid-ranks (1-based, ties averaged). Exposed for reuse and testing.
std::vector<double> midranks(std::span<const double> values);

}  // namespace tourexp
