#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>
#include <string>
#include <vector>

#include "tourexp/cube.hpp"
#include "tourexp/stats.hpp"

namespace testhelp {

namespace fs = std::filesystem;

/// Unique scratch directory, removed on destruction.
struct TempDir {
  fs::path path;
  TempDir() {
    static std::uint64_t counter = 0;
    path = fs::temp_directory_path() /
           ("tourexp_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path file(const std::string& name) const { return path / name; }
};

inline void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline tourexp::TransactionAggregate rec(const std::string& origin, const std::string& dest,
                                         const std::string& muni, const std::string& industry,
                                         tourexp::Quarter q, double usd_amount,
                                         std::int64_t txn = 1) {
  tourexp::TransactionAggregate r;
  r.origin = origin;
  r.dest_country = dest;
  r.municipality_id = muni;
  r.industry = industry;
  r.quarter = q;
  r.usd = static_cast<tourexp::Cents>(std::llround(usd_amount * 100.0));
  r.txn_count = txn;
  return r;
}

// ---------------------------------------------------------------------------
// Independent oracles. These deliberately avoid the library's code paths:
// long-double arithmetic, naive formulas.
// ---------------------------------------------------------------------------

/// Normal-equations least squares: builds X'X and X'y in long double and
/// solves by Gaussian elimination with partial pivoting.
inline std::vector<double> normal_equations_ols(const std::vector<std::vector<double>>& columns,
                                                const std::vector<double>& y, bool intercept) {
  const std::size_t n = y.size();
  std::vector<std::vector<long double>> x;
  if (intercept) x.push_back(std::vector<long double>(n, 1.0L));
  for (const auto& c : columns) x.emplace_back(c.begin(), c.end());
  const std::size_t p = x.size();

  std::vector<std::vector<long double>> a(p, std::vector<long double>(p + 1, 0.0L));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t t = 0; t < n; ++t) a[i][j] += x[i][t] * x[j][t];
    for (std::size_t t = 0; t < n; ++t) a[i][p] += x[i][t] * static_cast<long double>(y[t]);
  }
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r)
      if (std::fabs(static_cast<double>(a[r][col])) >
          std::fabs(static_cast<double>(a[pivot][col])))
        pivot = r;
    std::swap(a[col], a[pivot]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const long double f = a[r][col] / a[col][col];
      for (std::size_t j = col; j <= p; ++j) a[r][j] -= f * a[col][j];
    }
  }
  std::vector<double> beta(p);
  for (std::size_t i = 0; i < p; ++i) beta[i] = static_cast<double>(a[i][p] / a[i][i]);
  return beta;
}

/// Pearson correlation straight from the definition formula, long double.
inline double pearson_definition(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double num = n * sxy - sx * sy;
  const long double den = std::sqrt(n * sxx - sx * sx) * std::sqrt(n * syy - sy * sy);
  return static_cast<double>(num / den);
}

/// Average ranks computed by a separate route (per-element counting).
inline std::vector<double> ranks_by_counting(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (v[j] < v[i]) ++below;
      if (v[j] == v[i]) ++equal;
    }
    ranks[i] = below + (equal + 1) / 2.0;  // average rank of the tie run
  }
  return ranks;
}

/// Regularized incomplete beta via composite 20-point Gauss-Legendre
/// quadrature of the density in long double. Valid for a, b >= 1 where the
/// integrand is smooth on [0, x].
inline long double ibeta_integrand(long double t, long double a, long double b) {
  if (t <= 0 || t >= 1) return 0;
  return std::exp((a - 1) * std::log(t) + (b - 1) * std::log1p(-t));
}

inline double incbeta_quadrature(double a, double b, double x) {
  // 20-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; the
  // rule is symmetric).
  static const long double nodes[] = {
      0.0765265211334973337546404L, 0.2277858511416450780804962L,
      0.3737060887154195606725482L, 0.5108670019508270980043641L,
      0.6360536807265150254528367L, 0.7463319064601507926143051L,
      0.8391169718222188233945291L, 0.9122344282513259058677524L,
      0.9639719272779137912676661L, 0.9931285991850949247861224L};
  static const long double weights[] = {
      0.1527533871307258506980843L, 0.1491729864726037467878287L,
      0.1420961093183820513292983L, 0.1316886384491766268984945L,
      0.1181945319615184173123774L, 0.1019301198172404350367501L,
      0.0832767415767047487247581L, 0.0626720483341090635695065L,
      0.0406014298003869413310400L, 0.0176140071391521183118620L};

  const long double la = a, lb = b;
  long double integral = 0;
  // Mesh geometrically graded toward both endpoints: fractional powers of t
  // and (1 - t) lose derivative smoothness at 0 and 1.
  const long double upper = static_cast<long double>(x);
  std::vector<long double> cuts{0.0L};
  for (int level = 26; level >= 1; --level)
    cuts.push_back(upper / 2 * std::pow(0.5L, level));
  for (int level = 1; level <= 26; ++level)
    cuts.push_back(upper - upper / 2 * std::pow(0.5L, level));
  cuts.push_back(upper);
  for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const int panels = 64;
    const long double lo = cuts[seg], hi = cuts[seg + 1];
    const long double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const long double mid = lo + (p + 0.5L) * h;
      const long double half = h / 2;
      for (int i = 0; i < 10; ++i) {
        integral += weights[i] * half *
                    (ibeta_integrand(mid - half * nodes[i], la, lb) +
                     ibeta_integrand(mid + half * nodes[i], la, lb));
      }
    }
  }
  const long double lbeta = std::lgamma(la) + std::lgamma(lb) - std::lgamma(la + lb);
  return static_cast<double>(integral / std::exp(lbeta));
}

/// All set partitions of {0..n-1} as restricted growth strings.
inline std::vector<std::vector<int>> all_partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(n, 0);
  // enumerate restricted growth strings: a[0]=0, a[i] <= 1 + max(a[0..i-1])
  while (true) {
    out.push_back(a);
    int i = n - 1;
    for (; i > 0; --i) {
      int max_prefix = 0;
      for (int j = 0; j < i; ++j) max_prefix = std::max(max_prefix, a[j]);
      if (a[i] <= max_prefix) break;
    }
    if (i == 0) break;
    ++a[i];
    for (int j = i + 1; j < n; ++j) a[j] = 0;
  }
  return out;
}

}  // namespace testhelp
