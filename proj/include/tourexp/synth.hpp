#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tourexp/attributes.hpp"
#include "tourexp/classify.hpp"
#include "tourexp/cube.hpp"

namespace tourexp {

/// Explicit origin attributes for controlled experiments; when present they
/// replace the random draws. The same distance applies to every destination.
struct SynthOriginOverride {
  std::string code;
  double population = 0;
  double gdp_per_capita = 0;
  double distance_km = 0;
  bool common_language = false;
  double flight_connectivity = 0;
};

struct SynthDestination {
  std::string code;
  int municipality_count = 12;
  /// One row per planted cluster, giving the mixing weights over origin
  /// blocks (columns). Each row sums to 1. Origins are assigned to blocks
  /// round-robin.
  std::vector<std::vector<double>> cluster_mixing = {
      {0.8, 0.1, 0.1}, {0.1, 0.8, 0.1}, {0.1, 0.1, 0.8}};
};

struct SynthIndustry {
  std::string name;
  IndustryClass planted = IndustryClass::Other;
  /// Loading on the anchor's latent factor; larger loadings correlate more
  /// strongly with the accommodation series.
  double anchor_loading = 0.5;
};

struct SynthConfig {
  std::uint64_t seed = 7;
  int origin_count = 40;
  std::vector<SynthDestination> destinations;
  std::vector<SynthIndustry> industries;
  std::string anchor_industry = "Accommodations";
  std::string atm_industry = "ATMs";
  Quarter first_quarter{2011, 4};
  int quarter_count = 12;

  // Planted gravity law, in logs.
  double alpha = 3.0;
  double beta_pop = 1.0;
  double beta_gdppc = 2.0;
  double rho_distance = -2.0;
  double beta_language = 0.5;
  double beta_flights = 0.1;
  double sigma = 0.3;

  // Attribute draw scales (log-normal medians and log-sigmas).
  double population_median = 1e7, population_log_sigma = 0.8;
  double gdppc_median = 2e4, gdppc_log_sigma = 0.4;
  double distance_median = 5000, distance_log_sigma = 0.5;
  double language_probability = 0.2;
  double flights_zero_probability = 0.3;
  double flights_median = 20, flights_log_sigma = 1.0;

  // Allocation noise.
  double cluster_noise = 0.15;       // log-normal jitter on cluster preferences
  double municipality_log_sigma = 0.5;
  double quarter_log_sigma = 0.3;
  double industry_noise = 1.0;       // scale of the idiosyncratic series noise

  std::vector<SynthOriginOverride> origin_overrides;

  static SynthConfig defaults();
  void validate() const;
};

/// Everything needed to verify an estimator against the generator.
struct GroundTruth {
  std::uint64_t seed = 0;
  double alpha = 0, beta_pop = 0, beta_gdppc = 0, rho_distance = 0;
  double beta_language = 0, beta_flights = 0, sigma = 0;
  std::string anchor, atm;
  std::map<std::string, int> origin_block;
  std::map<std::string, int> municipality_cluster;
  std::map<std::string, std::string> industry_class;
  std::map<std::string, double> anchor_loading;
  /// Noiseless log expenditure per "origin|dest" before quantization.
  std::map<std::string, double> log_expenditure;

  std::string to_json() const;
};

struct SynthOutput {
  ExpenditureCube cube;
  std::vector<CountryAttributes> countries;
  std::vector<PairAttributes> pairs;
  std::vector<MunicipalityGeo> municipalities;
  GroundTruth truth;
};

/// Deterministic for a given config: identical seeds produce byte-identical
/// files. Country totals follow the planted log-linear law (exactly at
/// sigma = 0, up to cent quantization), municipal allocation follows the
/// planted cluster preferences and industry series follow the planted
/// loading ladder.
SynthOutput generate(const SynthConfig& config);

/// Writes transactions.csv, countries.csv, pairs.csv, municipalities.geojson
/// and ground_truth.json into the directory.
std::vector<std::filesystem::path> write_synth_files(const SynthOutput& output,
                                                     const std::filesystem::path& out_dir);

}  // namespace tourexp
