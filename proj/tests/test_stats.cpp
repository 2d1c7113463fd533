#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "tourexp/errors.hpp"
#include "tourexp/prob.hpp"
#include "tourexp/stats.hpp"

using namespace tourexp;

namespace {

DesignMatrix random_design(std::mt19937_64& rng, int n, int k, double beta_scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  DesignMatrix d;
  std::vector<double> beta(k);
  for (auto& b : beta) b = beta_scale * gauss(rng);
  d.response.assign(n, 0.0);
  for (int j = 0; j < k; ++j) {
    std::vector<double> col(n);
    for (auto& v : col) v = gauss(rng);
    for (int i = 0; i < n; ++i) d.response[i] += beta[j] * col[i];
    d.add_column("x" + std::to_string(j), std::move(col));
  }
  for (auto& y : d.response) y += 0.5 + 0.3 * gauss(rng);
  return d;
}

}  // namespace

TEST_CASE("incomplete beta matches quadrature to 1e-10") {
  // The density is smooth for a,b >= 1, where adaptive Simpson is reliable.
  const double as[] = {1.0, 2.5, 7.0, 40.0, 150.0};
  const double bs[] = {1.5, 4.0, 25.0, 99.0};
  const double xs[] = {0.001, 0.2, 0.5, 0.77, 0.999};
  for (double a : as)
    for (double b : bs)
      for (double x : xs) {
        const double got = prob::incbeta(a, b, x);
        const double want = testhelp::incbeta_quadrature(a, b, x);
        CHECK(std::abs(got - want) <= 1e-10);
      }
  CHECK(prob::incbeta(2, 3, 0.0) == 0.0);
  CHECK(prob::incbeta(2, 3, 1.0) == 1.0);
  CHECK_THROWS_AS(prob::incbeta(0, 1, 0.5), NumericError);
}

TEST_CASE("incomplete beta matches frozen arbitrary-precision references") {
  // Reference values computed with 40-digit arithmetic, covering the
  // endpoint-singular shapes (a < 1 or b < 1) the quadrature oracle skips.
  struct Ref {
    double a, b, x, value;
  };
  const Ref refs[] = {
      {0.5, 0.5, 0.3, 0.36901011956554537504},
      {0.5, 4.0, 0.2, 0.80498447189992430461},
      {0.7, 0.3, 0.9, 0.56668995266576552774},
      {2.5, 0.5, 0.77, 0.27613819068283419324},
      {0.9, 0.9, 0.001, 0.0018082274852599011883},
      {1.0, 1.0, 0.42, 0.41999999999999998446},
      {3.0, 2.0, 0.5, 0.3125},
      {12.5, 3.5, 0.8, 0.52686967088606794365},
      {40.0, 60.0, 0.35, 0.15345812249917357449},
      {150.0, 99.0, 0.6, 0.46557108170296441028},
      {5.0, 117.0, 0.02, 0.096356352628837550316},
      {0.5, 199.5, 0.004, 0.79369931701584865777},
  };
  for (const auto& r : refs)
    CHECK(std::abs(prob::incbeta(r.a, r.b, r.x) - r.value) <= 1e-12);
}

TEST_CASE("t and F tails behave") {
  CHECK(prob::student_t_two_sided(0.0, 10) == doctest::Approx(1.0));
  // symmetric in t
  CHECK(prob::student_t_two_sided(1.7, 8) == doctest::Approx(prob::student_t_two_sided(-1.7, 8)));
  // monotone decreasing in |t|
  CHECK(prob::student_t_two_sided(2.0, 12) < prob::student_t_two_sided(1.0, 12));
  // t^2 with df2 equals F(1, df2)
  CHECK(prob::f_upper_tail(2.5 * 2.5, 1, 9) ==
        doctest::Approx(prob::student_t_two_sided(2.5, 9)).epsilon(1e-12));
  CHECK(prob::f_upper_tail(0.0, 3, 9) == 1.0);
}

TEST_CASE("perfect linear fit") {
  DesignMatrix d;
  std::vector<double> x, y;
  for (int i = 1; i <= 10; ++i) {
    x.push_back(i);
    y.push_back(2.0 * i);
  }
  d.add_column("x", x);
  d.response = y;
  const auto fit = ols_fit(d, true);
  CHECK(fit.coef("x").estimate == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(fit.coef("constant").estimate) <= 1e-10);
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(fit.residual_std_error) <= 1e-9);
}

TEST_CASE("constant response, intercept-only") {
  DesignMatrix d;
  d.response.assign(10, 3.25);
  const auto fit = ols_fit(d, true);
  CHECK(fit.coef("constant").estimate == doctest::Approx(3.25));
  CHECK(fit.r_squared == 0.0);  // defined as 0 for a degenerate response
  CHECK(fit.residual_std_error == doctest::Approx(0.0));
  CHECK(std::isnan(fit.f_statistic));
}

TEST_CASE("rank-deficient design names the collinear columns") {
  DesignMatrix d;
  std::vector<double> x = {1, 2, 3, 4, 5, 6};
  std::vector<double> twice = {2, 4, 6, 8, 10, 12};
  d.add_column("a", x);
  d.add_column("b", twice);
  d.response = {1, 2, 3, 4, 5, 7};
  CHECK_THROWS_WITH_AS(ols_fit(d, true), doctest::Contains("collinear"), NumericError);
}

TEST_CASE("too few observations") {
  DesignMatrix d;
  d.add_column("x", {1, 2});
  d.response = {1, 2};
  CHECK_THROWS_AS(ols_fit(d, true), NumericError);
}

TEST_CASE("100 random designs match the normal-equations oracle to 1e-8") {
  std::mt19937_64 rng(20240901);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 20 + static_cast<int>(rng() % 181);  // <= 200
    const int k = 1 + static_cast<int>(rng() % 10);    // <= 10
    const auto d = random_design(rng, n, k);
    const auto fit = ols_fit(d, true);
    const auto oracle = testhelp::normal_equations_ols(d.columns, d.response, true);
    REQUIRE(fit.coefficients.size() == oracle.size());
    for (std::size_t j = 0; j < oracle.size(); ++j) {
      const double scale = std::max(1.0, std::abs(oracle[j]));
      CHECK(std::abs(fit.coefficients[j].estimate - oracle[j]) <= 1e-8 * scale);
    }
  }
}

TEST_CASE("residuals are orthogonal to every regressor") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = random_design(rng, 120, 5);
    const auto fit = ols_fit(d, true);
    for (const auto& col : d.columns) {
      double dot = 0, scale = 0;
      for (std::size_t i = 0; i < col.size(); ++i) {
        dot += col[i] * fit.residuals[i];
        scale += std::abs(col[i]);
      }
      CHECK(std::abs(dot) <= 1e-8 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("one-level FE group collapses to plain OLS with intercept") {
  std::mt19937_64 rng(5);
  auto d = random_design(rng, 60, 3);
  auto with_fe = d;
  with_fe.fe_groups = {{"g", std::vector<std::string>(60, "all")}};
  const auto fe = fe_ols_fit(with_fe);
  const auto plain = ols_fit(d, true);
  for (const auto& c : fe.coefficients) {
    const auto& p = plain.coef(c.name);
    CHECK(c.estimate == doctest::Approx(p.estimate).epsilon(1e-10));
    CHECK(c.std_error == doctest::Approx(p.std_error).epsilon(1e-10));
  }
  CHECK(fe.df_residual == plain.df_residual);
  CHECK(fe.r_squared == doctest::Approx(plain.r_squared).epsilon(1e-10));
}

namespace {

DesignMatrix random_panel(std::mt19937_64& rng, int n, int k, int l1, int l2) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto d = random_design(rng, n, k);
  FEGroup g1{"origin", {}}, g2{"destination", {}};
  std::vector<double> fe1(l1), fe2(l2);
  for (auto& v : fe1) v = gauss(rng);
  for (auto& v : fe2) v = gauss(rng);
  for (int i = 0; i < n; ++i) {
    // contiguous level cycling keeps the two-way panel connected
    const int a = i % l1, b = (i / l1) % l2;
    g1.labels.push_back("o" + std::to_string(a));
    g2.labels.push_back("d" + std::to_string(b));
    d.response[i] += fe1[a] + fe2[b];
  }
  d.fe_groups = {g1, g2};
  return d;
}

DesignMatrix dummy_expand(const DesignMatrix& d) {
  DesignMatrix x;
  x.names = d.names;
  x.columns = d.columns;
  x.response = d.response;
  for (const auto& g : d.fe_groups) {
    std::vector<std::string> levels;
    for (const auto& l : g.labels)
      if (std::find(levels.begin(), levels.end(), l) == levels.end()) levels.push_back(l);
    std::sort(levels.begin(), levels.end());
    for (std::size_t l = 1; l < levels.size(); ++l) {
      std::vector<double> dummy(d.response.size(), 0.0);
      for (std::size_t i = 0; i < g.labels.size(); ++i)
        if (g.labels[i] == levels[l]) dummy[i] = 1.0;
      x.add_column(g.name + "#" + levels[l], std::move(dummy));
    }
  }
  return x;
}

}  // namespace

TEST_CASE("two-way FE equals dummy-encoded OLS to 1e-8 (40-row panel)") {
  std::mt19937_64 rng(77);
  const auto d = random_panel(rng, 40, 2, 5, 4);
  const auto fe = fe_ols_fit(d);
  const auto dummies = ols_fit(dummy_expand(d), true);
  for (const auto& name : d.names) {
    CHECK(std::abs(fe.coef(name).estimate - dummies.coef(name).estimate) <= 1e-8);
    CHECK(std::abs(fe.coef(name).std_error - dummies.coef(name).std_error) <= 1e-8);
  }
  CHECK(fe.df_residual == dummies.df_residual);
  CHECK(fe.r_squared == doctest::Approx(dummies.r_squared).epsilon(1e-9));
  CHECK(fe.f_statistic == doctest::Approx(dummies.f_statistic).epsilon(1e-6));
  CHECK(fe.fe_absorbed.at("origin") == 5);
  CHECK(fe.fe_absorbed.at("destination") == 4);
}

TEST_CASE("FE slope invariant when a constant is added within one level") {
  std::mt19937_64 rng(78);
  auto d = random_panel(rng, 60, 2, 6, 3);
  const auto before = fe_ols_fit(d);
  for (std::size_t i = 0; i < d.response.size(); ++i)
    if (d.fe_groups[0].labels[i] == "o2") d.response[i] += 7.5;
  const auto after = fe_ols_fit(d);
  for (const auto& name : d.names)
    CHECK(before.coef(name).estimate == doctest::Approx(after.coef(name).estimate).epsilon(1e-9));
}

TEST_CASE("regressor constant within every FE cell is rejected") {
  DesignMatrix d;
  const int n = 24;
  FEGroup g{"g", {}};
  std::vector<double> aligned(n), ok(n);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    const int level = i % 4;
    g.labels.push_back("l" + std::to_string(level));
    aligned[i] = 10.0 + level;  // constant within each level
    ok[i] = gauss(rng);
  }
  d.add_column("aligned", aligned);
  d.add_column("ok", ok);
  d.response.assign(n, 0.0);
  for (int i = 0; i < n; ++i) d.response[i] = ok[i] * 2 + gauss(rng) * 0.1;
  d.fe_groups = {g};
  CHECK_THROWS_WITH_AS(fe_ols_fit(d), doctest::Contains("aligned"), NumericError);
}

TEST_CASE("pearson: trivial anchors and definition oracle") {
  std::vector<double> x = {1, 2, 3, 4, 5};
  CHECK(pearson_corr(x, x).coefficient == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<double> neg = {-1, -2, -3, -4, -5};
  CHECK(pearson_corr(x, neg).coefficient == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(pearson_corr(x, x).p_value == 0.0);

  std::vector<double> y = {2, 1, 4, 3, 7};
  const double want = testhelp::pearson_definition(x, y);
  CHECK(pearson_corr(x, y).coefficient == doctest::Approx(want).epsilon(1e-12));

  std::vector<double> flat = {3, 3, 3, 3, 3};
  CHECK_THROWS_AS(pearson_corr(x, flat), NumericError);
  CHECK_THROWS_AS(pearson_corr(std::vector<double>{1, 2}, std::vector<double>{2, 1}),
                  NumericError);
}

TEST_CASE("spearman: monotone invariance and tie handling") {
  std::vector<double> x = {0.3, 1.2, 2.0, 5.5, 9.1};
  std::vector<double> y;
  for (double v : x) y.push_back(std::exp(v));  // strictly increasing transform
  CHECK(spearman_corr(x, y).coefficient == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> tx = {1, 2, 2, 4};
  std::vector<double> ty = {10, 20, 20, 40};
  REQUIRE_THROWS_AS(spearman_corr(std::vector<double>{1, 1, 1}, ty), NumericError);
  // consistent ties keep the coefficient at 1 (4 points, mid-ranks)
  CHECK(spearman_corr(tx, ty).coefficient == doctest::Approx(1.0).epsilon(1e-12));

  const auto ranks = midranks(std::vector<double>{5, 1, 1, 3});
  CHECK(ranks == std::vector<double>{4.0, 1.5, 1.5, 3.0});
}

TEST_CASE("1000 random pairs: both correlations match their oracles to 1e-12") {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 5 + static_cast<int>(rng() % 60);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      // quantize sometimes to force ties
      const bool tie = rng() % 3 == 0;
      x[i] = tie ? std::round(gauss(rng) * 2) / 2 : gauss(rng);
      y[i] = 0.4 * x[i] + (tie ? std::round(gauss(rng)) : gauss(rng));
    }
    bool degenerate_x = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
    bool degenerate_y = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
    if (degenerate_x || degenerate_y) continue;

    const auto p = pearson_corr(x, y);
    CHECK(std::abs(p.coefficient - testhelp::pearson_definition(x, y)) <= 1e-12);

    const auto s = spearman_corr(x, y);
    const auto rx = testhelp::ranks_by_counting(x);
    const auto ry = testhelp::ranks_by_counting(y);
    CHECK(std::abs(s.coefficient - testhelp::pearson_definition(rx, ry)) <= 1e-12);

    // symmetry under argument swap
    CHECK(pearson_corr(y, x).coefficient == doctest::Approx(p.coefficient).epsilon(1e-15));
    CHECK(spearman_corr(y, x).coefficient == doctest::Approx(s.coefficient).epsilon(1e-15));
  }
}

TEST_CASE("pearson invariant under positive affine transforms") {
  std::mt19937_64 rng(321);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(40), y(40);
  for (int i = 0; i < 40; ++i) {
    x[i] = gauss(rng);
    y[i] = 0.7 * x[i] + gauss(rng);
  }
  const double base = pearson_corr(x, y).coefficient;
  std::vector<double> ax;
  for (double v : x) ax.push_back(3.5 * v + 11.0);
  CHECK(pearson_corr(ax, y).coefficient == doctest::Approx(base).epsilon(1e-12));

  // spearman invariant under any strictly monotone transform
  const double sbase = spearman_corr(x, y).coefficient;
  std::vector<double> mx;
  for (double v : x) mx.push_back(std::atan(v) * 2 + std::pow(v, 3) * 0.001);
  CHECK(spearman_corr(mx, y).coefficient == doctest::Approx(sbase).epsilon(1e-12));
}

TEST_CASE("p-value is monotone decreasing in |r| at fixed n") {
  // CorrResult invariant via the t-transform
  std::vector<double> ps;
  for (double r : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
    const double t = r * std::sqrt((20 - 2) / (1 - r * r));
    ps.push_back(prob::student_t_two_sided(t, 18));
  }
  CHECK(std::is_sorted(ps.rbegin(), ps.rend()));
}
