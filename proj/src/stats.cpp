#include "tourexp/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "tourexp/errors.hpp"
#include "tourexp/prob.hpp"

namespace tourexp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd to_matrix(const DesignMatrix& design, bool intercept) {
  const auto n = static_cast<Eigen::Index>(design.n_obs());
  const auto k = static_cast<Eigen::Index>(design.columns.size());
  Eigen::MatrixXd x(n, k + (intercept ? 1 : 0));
  Eigen::Index col = 0;
  if (intercept) x.col(col++).setOnes();
  for (const auto& c : design.columns) {
    if (static_cast<Eigen::Index>(c.size()) != n)
      throw NumericError("design column length does not match the response");
    x.col(col++) = Eigen::Map<const Eigen::VectorXd>(c.data(), n);
  }
  return x;
}

std::vector<std::string> column_names(const DesignMatrix& design, bool intercept) {
  std::vector<std::string> names;
  if (intercept) names.push_back("constant");
  names.insert(names.end(), design.names.begin(), design.names.end());
  return names;
}

struct LsqCore {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd xtx_inv;
};

// Column-pivoted QR solve with rank check; names the dependent columns.
LsqCore solve_qr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                 const std::vector<std::string>& names) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) {
    const auto& perm = qr.colsPermutation().indices();
    std::string collinear;
    for (Eigen::Index i = qr.rank(); i < x.cols(); ++i) {
      if (!collinear.empty()) collinear += ", ";
      collinear += names[static_cast<std::size_t>(perm[i])];
    }
    throw NumericError("rank-deficient design; collinear columns: " + collinear);
  }
  LsqCore out;
  out.beta = qr.solve(y);
  out.residuals = y - x * out.beta;
  const Eigen::MatrixXd r =
      qr.matrixR().topLeftCorner(x.cols(), x.cols()).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(x.cols(), x.cols()));
  const Eigen::MatrixXd perm = qr.colsPermutation();
  out.xtx_inv = perm * (r_inv * r_inv.transpose()) * perm.transpose();
  return out;
}

// Shared reporting for plain OLS and the demeaned FE path. `absorbed` is the
// number of parameters soaked up outside the reported columns, and `sst` the
// total sum of squares matching the model's centering convention.
FitResult assemble(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   const LsqCore& core, const std::vector<std::string>& names,
                   long absorbed, double sst, bool centered) {
  const long n = static_cast<long>(y.size());
  const long p_total = static_cast<long>(x.cols()) + absorbed;
  FitResult fit;
  fit.n_obs = n;
  fit.n_params = p_total;
  fit.df_residual = n - p_total;
  if (fit.df_residual < 0) throw NumericError("negative residual degrees of freedom");

  const double ssr = core.residuals.squaredNorm();
  const double sigma2 = fit.df_residual > 0 ? ssr / fit.df_residual : 0.0;
  fit.residual_std_error = std::sqrt(sigma2);

  if (sst > 0) {
    fit.r_squared = 1.0 - ssr / sst;
    if (fit.r_squared < 0 && fit.r_squared > -1e-12) fit.r_squared = 0.0;
    if (fit.r_squared > 1) fit.r_squared = 1.0;
  } else {
    fit.r_squared = 0.0;  // degenerate response: no variation to explain
  }
  const long adj_num = centered ? n - 1 : n;
  fit.adj_r_squared = fit.df_residual > 0
                          ? 1.0 - (1.0 - fit.r_squared) * adj_num / fit.df_residual
                          : fit.r_squared;

  const long model_df = centered ? p_total - 1 : p_total;
  if (model_df > 0 && fit.df_residual > 0 && sst > 0 && sigma2 > 0) {
    fit.f_statistic = ((sst - ssr) / model_df) / sigma2;
    fit.f_p_value = prob::f_upper_tail(fit.f_statistic, model_df, fit.df_residual);
  } else if (model_df > 0 && sst > ssr && sigma2 == 0) {
    fit.f_statistic = std::numeric_limits<double>::infinity();
    fit.f_p_value = 0.0;
  } else {
    fit.f_statistic = kNaN;
    fit.f_p_value = kNaN;
  }

  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Coefficient c;
    c.name = names[static_cast<std::size_t>(j)];
    c.estimate = core.beta[j];
    const double var = sigma2 * core.xtx_inv(j, j);
    c.std_error = var > 0 ? std::sqrt(var) : 0.0;
    if (fit.df_residual > 0 && c.std_error > 0) {
      c.t_value = c.estimate / c.std_error;
      c.p_value = prob::student_t_two_sided(c.t_value, fit.df_residual);
    } else {
      c.t_value = c.std_error == 0 && c.estimate != 0
                      ? std::numeric_limits<double>::infinity()
                      : kNaN;
      c.p_value = c.std_error == 0 && c.estimate != 0 ? 0.0 : kNaN;
    }
    fit.coefficients.push_back(std::move(c));
  }
  fit.residuals.assign(core.residuals.data(), core.residuals.data() + n);
  fit.fitted.resize(n);
  for (long i = 0; i < n; ++i) fit.fitted[i] = y[i] - fit.residuals[i];
  return fit;
}

std::vector<int> level_ids(const std::vector<std::string>& labels,
                           std::vector<std::string>* level_names = nullptr) {
  std::map<std::string, int> ids;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = ids.emplace(labels[i], static_cast<int>(ids.size()));
    out[i] = it->second;
  }
  if (level_names) {
    level_names->resize(ids.size());
    for (const auto& [name, id] : ids) (*level_names)[id] = name;
  }
  return out;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Parameters absorbed by the FE dummies (intercept included): exact for one
// and two groups; for deeper interactions the one-component count is an
// upper bound, which is the convention the two-way literature uses.
long absorbed_params(const std::vector<std::vector<int>>& group_ids,
                     const std::vector<long>& level_counts) {
  if (group_ids.size() == 1) return level_counts[0];
  if (group_ids.size() == 2) {
    const int l1 = static_cast<int>(level_counts[0]);
    const int l2 = static_cast<int>(level_counts[1]);
    UnionFind uf(l1 + l2);
    for (std::size_t i = 0; i < group_ids[0].size(); ++i)
      uf.unite(group_ids[0][i], l1 + group_ids[1][i]);
    std::set<int> roots;
    for (int v = 0; v < l1 + l2; ++v) roots.insert(uf.find(v));
    return l1 + l2 - static_cast<long>(roots.size());
  }
  long total = level_counts[0];
  for (std::size_t g = 1; g < level_counts.size(); ++g) total += level_counts[g] - 1;
  return total;
}

}  // namespace

void DesignMatrix::add_column(std::string name, std::vector<double> values) {
  names.push_back(std::move(name));
  columns.push_back(std::move(values));
}

const Coefficient& FitResult::coef(const std::string& name) const {
  for (const auto& c : coefficients)
    if (c.name == name) return c;
  throw Error("no coefficient named '" + name + "'");
}

FitResult ols_fit(const DesignMatrix& design, bool intercept) {
  const long n = static_cast<long>(design.n_obs());
  const long p = static_cast<long>(design.columns.size()) + (intercept ? 1 : 0);
  if (n < p + 1)
    throw NumericError("too few observations: n=" + std::to_string(n) + ", parameters=" +
                       std::to_string(p));
  const Eigen::MatrixXd x = to_matrix(design, intercept);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(design.response.data(), n);
  const auto names = column_names(design, intercept);
  const LsqCore core = solve_qr(x, y, names);

  double sst;
  if (intercept) {
    const double mean = y.mean();
    sst = (y.array() - mean).square().sum();
  } else {
    sst = y.squaredNorm();
  }
  return assemble(x, y, core, names, 0, sst, intercept);
}

FitResult fe_ols_fit(const DesignMatrix& design) {
  if (design.fe_groups.empty())
    throw NumericError("fe_ols_fit: no fixed-effect groups (use ols_fit)");
  const long n = static_cast<long>(design.n_obs());
  const long k = static_cast<long>(design.columns.size());

  std::vector<std::vector<int>> group_ids;
  std::vector<long> level_counts;
  for (const auto& g : design.fe_groups) {
    if (static_cast<long>(g.labels.size()) != n)
      throw NumericError("fe group '" + g.name + "' length does not match the response");
    group_ids.push_back(level_ids(g.labels));
    level_counts.push_back(*std::max_element(group_ids.back().begin(), group_ids.back().end()) + 1);
  }
  const long absorbed = absorbed_params(group_ids, level_counts);
  if (n < k + absorbed + 1)
    throw NumericError("too few observations for the fixed-effects model: n=" +
                       std::to_string(n) + ", parameters=" + std::to_string(k + absorbed));

  // Work copy: response first, then the regressors.
  Eigen::MatrixXd work(n, k + 1);
  work.col(0) = Eigen::Map<const Eigen::VectorXd>(design.response.data(), n);
  for (long j = 0; j < k; ++j)
    work.col(j + 1) = Eigen::Map<const Eigen::VectorXd>(design.columns[j].data(), n);
  const Eigen::VectorXd col_scale = work.colwise().norm();

  // Alternating within-group demeaning; one pass is exact for a single group.
  constexpr int kMaxSweeps = 2000;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double shift = 0;
    for (std::size_t g = 0; g < group_ids.size(); ++g) {
      const auto& ids = group_ids[g];
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(level_counts[g], k + 1);
      Eigen::VectorXd counts = Eigen::VectorXd::Zero(level_counts[g]);
      for (long i = 0; i < n; ++i) {
        sums.row(ids[i]) += work.row(i);
        counts[ids[i]] += 1;
      }
      for (long l = 0; l < level_counts[g]; ++l) sums.row(l) /= counts[l];
      for (long i = 0; i < n; ++i) work.row(i) -= sums.row(ids[i]);
      shift = std::max(shift, sums.cwiseAbs().maxCoeff());
    }
    if (design.fe_groups.size() == 1 || shift < 1e-12) break;
  }

  // A regressor constant within every FE cell demeans to (numerically) zero.
  std::string degenerate;
  for (long j = 0; j < k; ++j) {
    if (work.col(j + 1).norm() <= 1e-10 * std::max(1.0, col_scale[j + 1])) {
      if (!degenerate.empty()) degenerate += ", ";
      degenerate += design.names[j];
    }
  }
  if (!degenerate.empty())
    throw NumericError("rank-deficient design; collinear columns (constant within FE cells): " +
                       degenerate);

  const Eigen::VectorXd y_dm = work.col(0);
  const Eigen::MatrixXd x_dm = work.rightCols(k);
  const LsqCore core = solve_qr(x_dm, y_dm, design.names);

  // df must account for the absorbed levels, so refit the core stats here
  // rather than in solve/assemble with k alone.
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(design.response.data(), n);
  const double mean = y.mean();
  const double sst = (y.array() - mean).square().sum();
  FitResult fit = assemble(x_dm, y_dm, core, design.names, absorbed, sst, true);
  fit.fitted.resize(n);
  for (long i = 0; i < n; ++i) fit.fitted[i] = design.response[i] - fit.residuals[i];
  for (std::size_t g = 0; g < design.fe_groups.size(); ++g)
    fit.fe_absorbed[design.fe_groups[g].name] = level_counts[g];
  return fit;
}

FitResult fe_ols_fit_dummies(const DesignMatrix& design) {
  if (design.fe_groups.empty())
    throw NumericError("fe_ols_fit_dummies: no fixed-effect groups");
  DesignMatrix expanded;
  expanded.response = design.response;
  expanded.names = design.names;
  expanded.columns = design.columns;
  const long n = static_cast<long>(design.n_obs());

  std::map<std::string, long> absorbed_counts;
  for (const auto& g : design.fe_groups) {
    std::vector<std::string> levels;
    const auto ids = level_ids(g.labels, &levels);
    absorbed_counts[g.name] = static_cast<long>(levels.size());
    for (std::size_t l = 1; l < levels.size(); ++l) {  // first level is the base
      std::vector<double> dummy(n, 0.0);
      for (long i = 0; i < n; ++i)
        if (ids[i] == static_cast<int>(l)) dummy[i] = 1.0;
      expanded.add_column(g.name + "=" + levels[l], std::move(dummy));
    }
  }
  FitResult fit = ols_fit(expanded, /*intercept=*/true);
  // Report on the slope columns only, like the demeaned path.
  std::vector<Coefficient> slopes;
  for (const auto& c : fit.coefficients) {
    bool is_slope = false;
    for (const auto& name : design.names)
      if (c.name == name) is_slope = true;
    if (is_slope) slopes.push_back(c);
  }
  fit.coefficients = std::move(slopes);
  fit.fe_absorbed = std::move(absorbed_counts);
  return fit;
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

CorrResult pearson_corr(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw NumericError("pearson_corr: length mismatch");
  const long n = static_cast<long>(x.size());
  if (n < 3) throw NumericError("pearson_corr: need at least 3 observations");
  double mx = 0, my = 0;
  for (long i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (long i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0 || syy == 0) throw NumericError("pearson_corr: zero variance");
  CorrResult out;
  out.n = n;
  out.coefficient = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double r2 = out.coefficient * out.coefficient;
  if (r2 >= 1.0) {
    out.p_value = 0.0;
  } else {
    const double t = out.coefficient * std::sqrt((n - 2) / (1.0 - r2));
    out.p_value = prob::student_t_two_sided(t, n - 2);
  }
  return out;
}

CorrResult spearman_corr(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw NumericError("spearman_corr: length mismatch");
  if (x.size() < 3) throw NumericError("spearman_corr: need at least 3 observations");
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  auto all_tied = [](const std::vector<double>& r) {
    return std::all_of(r.begin(), r.end(), [&](double v) { return v == r.front(); });
  };
  if (all_tied(rx) || all_tied(ry))
    throw NumericError("spearman_corr: all values tied");
  return pearson_corr(rx, ry);
}

}  // namespace tourexp
