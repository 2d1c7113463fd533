#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "tourexp/attributes.hpp"
#include "tourexp/cube.hpp"
#include "tourexp/errors.hpp"
#include "tourexp/money.hpp"
#include "tourexp/quarter.hpp"

using namespace tourexp;
using testhelp::rec;
using testhelp::TempDir;
using testhelp::write_file;

TEST_CASE("quarter parsing and ordering") {
  auto q = parse_quarter("2013Q2");
  REQUIRE(q);
  CHECK(q->year == 2013);
  CHECK(q->q == 2);
  CHECK(q->str() == "2013Q2");
  CHECK(Quarter{2011, 4} < Quarter{2012, 1});
  CHECK(Quarter::from_ordinal(Quarter{2011, 4}.ordinal() + 1) == Quarter{2012, 1});
  CHECK_FALSE(parse_quarter("2013Q5"));
  CHECK_FALSE(parse_quarter("13Q2"));
  CHECK_FALSE(parse_quarter("2013-2"));
  auto w = parse_quarter_window("2011Q4:2014Q3");
  REQUIRE(w);
  CHECK(w->contains(Quarter{2013, 1}));
  CHECK_FALSE(w->contains(Quarter{2014, 4}));
}

TEST_CASE("usd fixed-point parsing") {
  CHECK(*parse_usd("100.0") == 10000);
  CHECK(*parse_usd("100") == 10000);
  CHECK(*parse_usd("100.05") == 10005);
  CHECK(*parse_usd("0.5") == 50);
  CHECK_FALSE(parse_usd("1.234"));   // more than 2 decimals
  CHECK_FALSE(parse_usd("-3"));
  CHECK_FALSE(parse_usd("1e3"));
  CHECK_FALSE(parse_usd(""));
  CHECK_FALSE(parse_usd("12."));
  CHECK(format_usd(10005) == "100.05");
  CHECK(format_usd(50) == "0.50");
}

TEST_CASE("single-row parse identity") {
  TempDir tmp;
  write_file(tmp.file("t.csv"),
             "origin,dest_country,municipality_id,industry,quarter,usd,txn_count\n"
             "USA,COL,bogota,Accommodations,2013Q2,100.0,4\n");
  ParseReport report;
  const auto cube = parse_transactions(tmp.file("t.csv"), std::nullopt, &report);
  CHECK(cube.size() == 1);
  CHECK(cube.total_usd() == 10000);
  CHECK(cube.total_txn() == 4);
  CHECK(report.rows_kept == 1);
  CHECK(cube.country_of("bogota") == "COL");
}

TEST_CASE("duplicate keys merge by summation") {
  TempDir tmp;
  write_file(tmp.file("t.csv"),
             "origin,dest_country,municipality_id,industry,quarter,usd,txn_count\n"
             "USA,COL,bogota,Accommodations,2013Q2,10.0,1\n"
             "USA,COL,bogota,Accommodations,2013Q2,15.0,2\n");
  ParseReport report;
  const auto cube = parse_transactions(tmp.file("t.csv"), std::nullopt, &report);
  CHECK(cube.size() == 1);
  CHECK(cube.total_usd() == 2500);
  CHECK(cube.records()[0].txn_count == 3);
  CHECK(report.merged_duplicates == 1);
}

TEST_CASE("row-level rejections and hard errors") {
  TempDir tmp;
  SUBCASE("domestic row rejected and counted") {
    write_file(tmp.file("t.csv"),
               "origin,dest_country,municipality_id,industry,quarter,usd,txn_count\n"
               "COL,COL,bogota,ATMs,2013Q2,5.0,1\n"
               "USA,COL,bogota,ATMs,2013Q2,5.0,1\n");
    ParseReport report;
    const auto cube = parse_transactions(tmp.file("t.csv"), std::nullopt, &report);
    CHECK(cube.size() == 1);
    CHECK(report.rejected_domestic == 1);
  }
  SUBCASE("out-of-window row rejected and counted") {
    write_file(tmp.file("t.csv"),
               "origin,dest_country,municipality_id,industry,quarter,usd,txn_count\n"
               "USA,COL,bogota,ATMs,2010Q2,5.0,1\n"
               "USA,COL,bogota,ATMs,2013Q2,5.0,1\n");
    ParseReport report;
    const auto cube =
        parse_transactions(tmp.file("t.csv"), parse_quarter_window("2011Q4:2014Q3"), &report);
    CHECK(cube.size() == 1);
    CHECK(report.rejected_out_of_window == 1);
  }
  SUBCASE("malformed rows raise with the line number") {
    write_file(tmp.file("t.csv"),
               "origin,dest_country,municipality_id,industry,quarter,usd,txn_count\n"
               "USA,COL,bogota,ATMs,2013Q2,not-a-number,1\n");
    CHECK_THROWS_WITH_AS(parse_transactions(tmp.file("t.csv")),
                         doctest::Contains("t.csv:2"), ParseError);
  }
  SUBCASE("unknown quarter format") {
    write_file(tmp.file("t.csv"),
               "origin,dest_country,municipality_id,industry,quarter,usd,txn_count\n"
               "USA,COL,bogota,ATMs,2013-07,5.0,1\n");
    CHECK_THROWS_WITH_AS(parse_transactions(tmp.file("t.csv")),
                         doctest::Contains("quarter"), ParseError);
  }
  SUBCASE("header mismatch") {
    write_file(tmp.file("t.csv"), "a,b\n1,2\n");
    CHECK_THROWS_AS(parse_transactions(tmp.file("t.csv")), ParseError);
  }
  SUBCASE("municipality in two countries") {
    write_file(tmp.file("t.csv"),
               "origin,dest_country,municipality_id,industry,quarter,usd,txn_count\n"
               "USA,COL,m1,ATMs,2013Q2,5.0,1\n"
               "USA,NLD,m1,ATMs,2013Q2,5.0,1\n");
    CHECK_THROWS_WITH_AS(parse_transactions(tmp.file("t.csv")),
                         doctest::Contains("two destination countries"), ParseError);
  }
}

TEST_CASE("10k-row file: marginals equal line-by-line accumulation") {
  // Oracle: accumulate sums straight from the text rows, independent of the
  // cube machinery.
  TempDir tmp;
  std::mt19937_64 rng(42);
  std::ostringstream file;
  file << "origin,dest_country,municipality_id,industry,quarter,usd,txn_count\n";
  const std::vector<std::string> origins = {"USA", "DEU", "BEL", "FRA", "VEN"};
  const std::vector<std::string> munis = {"m1", "m2", "m3", "m4"};
  const std::vector<std::string> industries = {"ATMs", "Accommodations", "Grocery Stores"};
  const std::vector<std::string> quarters = {"2012Q1", "2012Q2", "2012Q3", "2012Q4"};

  std::map<std::string, long long> origin_cents, quarter_cents;
  long long grand = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto& o = origins[rng() % origins.size()];
    const auto& m = munis[rng() % munis.size()];
    const auto& ind = industries[rng() % industries.size()];
    const auto& q = quarters[rng() % quarters.size()];
    const long long cents = static_cast<long long>(rng() % 1000000);
    file << o << ",COL," << m << "," << ind << "," << q << ","
         << format_usd(cents) << ",1\n";
    origin_cents[o] += cents;
    quarter_cents[q] += cents;
    grand += cents;
  }
  write_file(tmp.file("t.csv"), file.str());
  const auto cube = parse_transactions(tmp.file("t.csv"));
  CHECK(cube.total_usd() == grand);

  const auto by_origin = aggregate(cube, {Dim::Origin}, Measure::Usd);
  for (const auto& [key, total] : by_origin) CHECK(total == origin_cents.at(key[0]));
  const auto by_quarter = aggregate(cube, {Dim::QuarterDim}, Measure::Usd);
  for (const auto& [key, total] : by_quarter) CHECK(total == quarter_cents.at(key[0]));
}

TEST_CASE("aggregate partitions the grand total") {
  auto cube = ExpenditureCube::from_records({
      rec("USA", "COL", "m1", "ATMs", {2013, 1}, 1.0),
      rec("USA", "COL", "m2", "ATMs", {2013, 2}, 2.0),
      rec("DEU", "COL", "m1", "Accommodations", {2013, 1}, 3.0),
  });
  const auto by_origin = aggregate(cube, {Dim::Origin}, Measure::Usd);
  CHECK(by_origin.size() == 2);
  std::int64_t sum = 0;
  for (const auto& [key, total] : by_origin) sum += total;
  CHECK(sum == 600);
  CHECK(sum == cube.total_usd());

  // identity aggregation: all five dimensions reproduce the records
  const auto full = aggregate(
      cube, {Dim::Origin, Dim::DestCountry, Dim::Municipality, Dim::Industry, Dim::QuarterDim},
      Measure::Usd);
  CHECK(full.size() == cube.size());

  // nested-loop oracle over (dest, quarter)
  std::map<std::pair<std::string, std::string>, std::int64_t> oracle;
  for (const auto& r : cube.records()) oracle[{r.dest_country, r.quarter.str()}] += r.usd;
  const auto pairs = aggregate(cube, {Dim::DestCountry, Dim::QuarterDim}, Measure::Usd);
  CHECK(pairs.size() == oracle.size());
  for (const auto& [key, total] : pairs) CHECK(total == oracle.at({key[0], key[1]}));

  CHECK_THROWS_AS(aggregate(cube, {}, Measure::Usd), Error);
  CHECK(aggregate(ExpenditureCube{}, {Dim::Origin}, Measure::Usd).empty());
}

TEST_CASE("coarsening an aggregation matches aggregating directly") {
  std::mt19937_64 rng(7);
  std::vector<TransactionAggregate> records;
  for (int i = 0; i < 500; ++i) {
    const std::string dest = i % 3 ? "COL" : "NLD";
    records.push_back(rec(i % 2 ? "USA" : "DEU", dest, dest + "-m" + std::to_string(i % 5),
                          "ind" + std::to_string(i % 4),
                          {2012, 1 + static_cast<int>(rng() % 4)},
                          static_cast<double>(rng() % 10000) / 100.0));
  }
  const auto cube = ExpenditureCube::from_records(std::move(records));

  const auto fine = aggregate(cube, {Dim::Origin, Dim::QuarterDim}, Measure::Usd);
  std::map<GroupKey, std::int64_t> coarsened;
  for (const auto& [key, total] : fine) coarsened[{key[0]}] += total;
  CHECK(coarsened == aggregate(cube, {Dim::Origin}, Measure::Usd));
}

TEST_CASE("parse -> serialize -> parse round-trips") {
  TempDir tmp;
  std::vector<TransactionAggregate> records;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i)
    records.push_back(rec(i % 2 ? "USA" : "DEU", "COL", "m" + std::to_string(i % 7),
                          "Industry, with comma", {2013, 1 + static_cast<int>(rng() % 4)},
                          static_cast<double>(rng() % 100000) / 100.0, rng() % 50));
  const auto cube = ExpenditureCube::from_records(std::move(records));

  std::ostringstream first;
  write_transactions(first, cube);
  write_file(tmp.file("t.csv"), first.str());
  const auto reparsed = parse_transactions(tmp.file("t.csv"));
  std::ostringstream second;
  write_transactions(second, reparsed);
  CHECK(first.str() == second.str());
  CHECK(reparsed.total_usd() == cube.total_usd());
  CHECK(reparsed.size() == cube.size());
}

TEST_CASE("ppp view rescales by destination factor") {
  auto cube = ExpenditureCube::from_records({
      rec("USA", "COL", "m1", "ATMs", {2013, 1}, 100.0),
      rec("USA", "NLD", "n1", "ATMs", {2013, 1}, 100.0),
  });
  const auto adjusted = apply_ppp(cube, {{"COL", 2.0}, {"NLD", 0.5}});
  const auto by_dest = aggregate(adjusted, {Dim::DestCountry}, Measure::Usd);
  CHECK(by_dest.at({"COL"}) == 20000);
  CHECK(by_dest.at({"NLD"}) == 5000);
  CHECK_THROWS_WITH_AS(apply_ppp(cube, {{"COL", 2.0}}), doctest::Contains("NLD"), Error);
}

static const char* kCountriesCsv =
    "iso3,population,gdp_per_capita\n"
    "NLD,16800000,51000\n"
    "BEL,11200000,46000\n";

TEST_CASE("attribute parsing and cross-validation") {
  TempDir tmp;
  SUBCASE("gdp_total computed within 1%") {
    write_file(tmp.file("c.csv"), kCountriesCsv);
    write_file(tmp.file("p.csv"),
               "origin,dest,distance_km,common_language,flight_connectivity\n"
               "BEL,NLD,173.6,1,12\n");
    const auto attrs = parse_attributes(tmp.file("c.csv"), tmp.file("p.csv"));
    CHECK(attrs.country("NLD")->gdp_total == doctest::Approx(16800000.0 * 51000).epsilon(1e-12));
    CHECK(attrs.pair("NLD", "BEL") != nullptr);  // mirrored lookup
    CHECK(attrs.pair("NLD", "BEL")->distance_km == 173.6);
  }
  SUBCASE("explicit gdp_total outside 1% rejected") {
    write_file(tmp.file("c.csv"),
               "iso3,population,gdp_per_capita,gdp_total\n"
               "NLD,16800000,51000,9.0e11\n");
    write_file(tmp.file("p.csv"),
               "origin,dest,distance_km,common_language,flight_connectivity\n");
    CHECK_THROWS_WITH_AS(parse_attributes(tmp.file("c.csv"), tmp.file("p.csv")),
                         doctest::Contains("1%"), ParseError);
  }
  SUBCASE("asymmetric duplicate distances rejected") {
    write_file(tmp.file("c.csv"), kCountriesCsv);
    write_file(tmp.file("p.csv"),
               "origin,dest,distance_km,common_language,flight_connectivity\n"
               "BEL,NLD,173.6,1,12\n"
               "NLD,BEL,190.0,1,12\n");
    CHECK_THROWS_WITH_AS(parse_attributes(tmp.file("c.csv"), tmp.file("p.csv")),
                         doctest::Contains("asymmetric"), ParseError);
  }
  SUBCASE("pair origin missing from country file lists the codes") {
    write_file(tmp.file("c.csv"), kCountriesCsv);
    write_file(tmp.file("p.csv"),
               "origin,dest,distance_km,common_language,flight_connectivity\n"
               "FRA,NLD,500,0,30\n");
    CHECK_THROWS_WITH_AS(parse_attributes(tmp.file("c.csv"), tmp.file("p.csv")),
                         doctest::Contains("FRA"), ParseError);
  }
  SUBCASE("negative distance rejected") {
    write_file(tmp.file("c.csv"), kCountriesCsv);
    write_file(tmp.file("p.csv"),
               "origin,dest,distance_km,common_language,flight_connectivity\n"
               "BEL,NLD,-3,1,12\n");
    CHECK_THROWS_AS(parse_attributes(tmp.file("c.csv"), tmp.file("p.csv")), ParseError);
  }
  SUBCASE("unmatched geo municipality flagged, not fatal") {
    write_file(tmp.file("c.csv"), kCountriesCsv);
    write_file(tmp.file("p.csv"),
               "origin,dest,distance_km,common_language,flight_connectivity\n"
               "BEL,NLD,173.6,1,12\n");
    write_file(tmp.file("g.json"), R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"municipality_id":"m1","dest_country":"NLD","name":"A"},
       "geometry":{"type":"Point","coordinates":[4.9,52.4]}},
      {"type":"Feature","properties":{"municipality_id":"ghost","dest_country":"NLD","name":"B"},
       "geometry":{"type":"Point","coordinates":[5.0,52.0]}}]})");
    const auto cube = ExpenditureCube::from_records(
        {rec("BEL", "NLD", "m1", "ATMs", {2013, 1}, 10.0)});
    const auto attrs =
        parse_attributes(tmp.file("c.csv"), tmp.file("p.csv"), tmp.file("g.json"), &cube);
    CHECK(attrs.municipalities.size() == 2);
    REQUIRE(attrs.unmatched_geo.size() == 1);
    CHECK(attrs.unmatched_geo[0] == "ghost");
  }
}
