#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "tourexp/classify.hpp"
#include "tourexp/community.hpp"
#include "tourexp/errors.hpp"
#include "tourexp/gravity.hpp"
#include "tourexp/spaces.hpp"
#include "tourexp/synth.hpp"

using namespace tourexp;

namespace {

AttributeSet attrs_of(const SynthOutput& output) {
  AttributeSet attrs;
  for (const auto& c : output.countries) attrs.countries[c.iso3] = c;
  for (const auto& p : output.pairs) attrs.pairs[{p.origin, p.dest}] = p;
  return attrs;
}

}  // namespace

TEST_CASE("identical seed produces byte-identical files") {
  testhelp::TempDir a, b;
  SynthConfig config = SynthConfig::defaults();
  config.seed = 404;
  config.origin_count = 15;
  write_synth_files(generate(config), a.path);
  write_synth_files(generate(config), b.path);
  for (const char* name : {"transactions.csv", "countries.csv", "pairs.csv",
                           "municipalities.geojson", "ground_truth.json"}) {
    INFO(name);
    CHECK(testhelp::read_file(a.file(name)) == testhelp::read_file(b.file(name)));
    CHECK_FALSE(testhelp::read_file(a.file(name)).empty());
  }
  // a different seed changes the transactions
  config.seed = 405;
  testhelp::TempDir c;
  write_synth_files(generate(config), c.path);
  CHECK(testhelp::read_file(a.file("transactions.csv")) !=
        testhelp::read_file(c.file("transactions.csv")));
}

TEST_CASE("generated cube passes ingestion validation end to end") {
  testhelp::TempDir tmp;
  SynthConfig config = SynthConfig::defaults();
  config.seed = 7;
  config.origin_count = 10;
  const auto output = generate(config);
  write_synth_files(output, tmp.path);

  ParseReport report;
  const auto cube = parse_transactions(tmp.file("transactions.csv"), std::nullopt, &report);
  CHECK(cube.total_usd() == output.cube.total_usd());
  CHECK(cube.size() == output.cube.size());
  CHECK(report.merged_duplicates == 0);
  CHECK(report.rejected_domestic == 0);

  const auto attrs = parse_attributes(tmp.file("countries.csv"), tmp.file("pairs.csv"),
                                      tmp.file("municipalities.geojson"), &cube);
  CHECK(attrs.countries.size() == 10);
  CHECK(attrs.unmatched_geo.empty());
  CHECK(attrs.municipalities.size() == cube.municipalities().size());
}

TEST_CASE("country totals sum municipality allocations exactly") {
  SynthConfig config = SynthConfig::defaults();
  config.seed = 12;
  config.origin_count = 8;
  const auto output = generate(config);
  const auto by_pair = aggregate(output.cube, {Dim::Origin, Dim::DestCountry}, Measure::Usd);
  for (const auto& [key, cents] : by_pair) {
    const double mu = output.truth.log_expenditure.at(key[0] + "|" + key[1]);
    const double expected_cents = std::exp(mu) * 100.0;
    CHECK(std::abs(static_cast<double>(cents) - expected_cents) <= 0.51);
  }
}

TEST_CASE("config validation") {
  SynthConfig config = SynthConfig::defaults();
  config.origin_count = 0;
  CHECK_THROWS_AS(generate(config), Error);

  config = SynthConfig::defaults();
  config.destinations[0].cluster_mixing = {{0.5, 0.4}};  // does not sum to 1
  CHECK_THROWS_AS(generate(config), Error);

  config = SynthConfig::defaults();
  config.sigma = -1;
  CHECK_THROWS_AS(generate(config), Error);

  config = SynthConfig::defaults();
  config.industries = {{"Nothing Like The Anchor", IndustryClass::Other, 0.5}};
  CHECK_THROWS_AS(generate(config), Error);
}

TEST_CASE("increasing noise weakly lowers the expected gravity fit quality") {
  // statistical check over 20 seeds: mean R^2 at sigma=0.15 vs sigma=0.9
  auto mean_r2 = [](double sigma) {
    double sum = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      SynthConfig config = SynthConfig::defaults();
      config.seed = seed;
      config.sigma = sigma;
      config.origin_count = 40;
      config.destinations = {{"COL", 2, {{1.0}}}};
      config.industries = {{"Accommodations", IndustryClass::Tourism, 1.0},
                           {"ATMs", IndustryClass::Commuting, 0.3}};
      config.quarter_count = 2;
      config.beta_language = 0;
      config.beta_flights = 0;
      const auto output = generate(config);
      const auto attrs = attrs_of(output);
      const auto fit =
          fit_gravity_model(build_gravity_rows(output.cube, attrs, "COL"), GravitySpec{});
      sum += fit.r_squared;
    }
    return sum / 20.0;
  };
  CHECK(mean_r2(0.15) > mean_r2(0.9));
}

TEST_CASE("full pipeline on generated data recovers planted structure") {
  SynthConfig config = SynthConfig::defaults();
  config.seed = 2025;
  config.origin_count = 45;
  config.sigma = 0.25;
  config.beta_language = 0;
  config.beta_flights = 0;
  // well-separated clusters and tame size dispersion
  config.population_log_sigma = 0.3;
  config.gdppc_log_sigma = 0.2;
  config.distance_log_sigma = 0.2;
  config.cluster_noise = 0.05;
  for (auto& d : config.destinations)
    d.cluster_mixing = {{0.96, 0.02, 0.02}, {0.02, 0.96, 0.02}, {0.02, 0.02, 0.96}};
  const auto output = generate(config);
  const auto attrs = attrs_of(output);
  const GroundTruth& truth = output.truth;

  // gravity within 3 SE of the planted coefficients
  const auto fit =
      fit_gravity_model(build_gravity_rows(output.cube, attrs, "COL"), GravitySpec{});
  CHECK(std::abs(fit.coef("log_pop").estimate - truth.beta_pop) <=
        3 * fit.coef("log_pop").std_error);
  CHECK(std::abs(fit.coef("log_gdppc").estimate - truth.beta_gdppc) <=
        3 * fit.coef("log_gdppc").std_error);
  CHECK(std::abs(fit.coef("log_distance").estimate - truth.rho_distance) <=
        3 * fit.coef("log_distance").std_error);

  // planted municipality clusters recovered exactly for both large dests
  for (const std::string dest : {"COL", "NLD"}) {
    const auto sub = output.cube.restrict_dest(dest);
    const auto sim = similarity(build_entity_vectors(sub, Axis::Destination));
    const auto partition = detect_communities(FlowGraph::from_similarity(sim), 1);
    REQUIRE(partition.module_count == 3);
    const auto by_key = partition.by_key(FlowGraph::from_similarity(sim));
    std::map<int, std::set<int>> observed;  // detected module -> planted clusters
    for (const auto& [muni, module] : by_key)
      observed[module].insert(truth.municipality_cluster.at(muni));
    for (const auto& [module, planted] : observed) CHECK(planted.size() == 1);
  }

  // planted industry classes recovered
  const auto cls = classify_industries(build_industry_series(output.cube),
                                       truth.anchor, truth.atm);
  for (const auto& row : cls.rows) {
    INFO(row.industry);
    CHECK(class_name(row.cls) == truth.industry_class.at(row.industry));
  }
}
