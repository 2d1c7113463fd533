#include "tourexp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "tourexp/csv.hpp"
#include "tourexp/errors.hpp"
#include "tourexp/manifest.hpp"

namespace tourexp {

namespace {

// Distribution transforms are hand-rolled on top of the standardized
// mt19937_64 bit stream, so output is identical across standard libraries.
struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}

  double uniform01() {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
  }
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  double lognormal(double median, double log_sigma) {
    return median * std::exp(log_sigma * normal());
  }
  bool bernoulli(double p) { return uniform01() < p; }
};

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Integer cents split proportionally to the weights, exact by largest
// remainder; ties and leftovers resolve in cell order.
std::vector<Cents> apportion(Cents total, const std::vector<double>& weights) {
  const std::size_t n = weights.size();
  double sum = 0;
  for (double w : weights) {
    if (!(w >= 0)) throw Error("apportion: negative weight");
    sum += w;
  }
  if (!(sum > 0)) throw Error("apportion: weights sum to zero");
  std::vector<Cents> out(n, 0);
  std::vector<std::pair<double, std::size_t>> fractional(n);
  Cents assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = static_cast<double>(total) * (weights[i] / sum);
    const double floor = std::floor(target);
    out[i] = static_cast<Cents>(floor);
    assigned += out[i];
    fractional[i] = {target - floor, i};
  }
  std::sort(fractional.begin(), fractional.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  Cents leftover = total - assigned;
  for (std::size_t i = 0; leftover > 0; i = (i + 1) % n, --leftover)
    out[fractional[i].second] += 1;
  return out;
}

std::vector<std::string> make_origin_codes(int count,
                                           const std::vector<std::string>& reserved) {
  std::vector<std::string> out;
  std::string code = "AAA";
  while (static_cast<int>(out.size()) < count) {
    if (std::find(reserved.begin(), reserved.end(), code) == reserved.end())
      out.push_back(code);
    // next three-letter code
    for (int i = 2; i >= 0; --i) {
      if (code[i] != 'Z') {
        ++code[i];
        break;
      }
      code[i] = 'A';
      if (i == 0) throw Error("origin code space exhausted");
    }
  }
  return out;
}

const char* kContinents[] = {"Americas", "Europe", "Asia", "Africa", "Oceania"};

}  // namespace

SynthConfig SynthConfig::defaults() {
  SynthConfig c;
  // Six destination countries, like the pooled analysis setting.
  const std::vector<std::vector<double>> mixing = {
      {0.8, 0.1, 0.1}, {0.1, 0.8, 0.1}, {0.1, 0.1, 0.8}};
  c.destinations = {{"COL", 12, mixing}, {"NLD", 12, mixing}, {"ALB", 6, mixing},
                    {"GRC", 6, mixing},  {"SVN", 6, mixing},  {"HRV", 6, mixing}};
  c.industries = {{"Accommodations", IndustryClass::Tourism, 1.0},
                  {"Eating Places", IndustryClass::Tourism, 0.95},
                  {"Family Apparel", IndustryClass::Tourism, 0.95},
                  {"Jewelry and Giftware", IndustryClass::Tourism, 0.95},
                  {"Department Stores", IndustryClass::Other, 0.55},
                  {"Automotive Fuel", IndustryClass::Other, 0.55},
                  {"Toy Stores", IndustryClass::Other, 0.55},
                  {"ATMs", IndustryClass::Commuting, 0.30},
                  {"Real Estate Services", IndustryClass::Commuting, 0.05},
                  {"Wholesale Trade", IndustryClass::Commuting, 0.05},
                  {"Insurance", IndustryClass::Commuting, 0.05},
                  {"Courier Services", IndustryClass::Commuting, 0.05}};
  return c;
}

void SynthConfig::validate() const {
  if (origin_count < 1) throw Error("synth: origin_count must be >= 1");
  if (destinations.empty()) throw Error("synth: at least one destination is required");
  if (quarter_count < 1) throw Error("synth: quarter_count must be >= 1");
  if (sigma < 0) throw Error("synth: sigma must be >= 0");
  if (industries.empty()) throw Error("synth: at least one industry is required");

  bool has_anchor = false, has_atm = false;
  for (const auto& ind : industries) {
    has_anchor = has_anchor || ind.name == anchor_industry;
    has_atm = has_atm || ind.name == atm_industry;
    if (ind.anchor_loading < 0 || ind.anchor_loading > 1)
      throw Error("synth: anchor_loading must be within [0, 1]");
  }
  if (!has_anchor) throw Error("synth: industries must include the anchor '" + anchor_industry + "'");
  if (industries.size() > 1 && !has_atm)
    throw Error("synth: industries must include the ATM key '" + atm_industry + "'");

  for (const auto& d : destinations) {
    if (d.code.size() != 3) throw Error("synth: destination codes must be 3 letters");
    if (d.municipality_count < 1) throw Error("synth: municipality_count must be >= 1");
    if (d.cluster_mixing.empty()) throw Error("synth: cluster_mixing must have rows");
    if (d.municipality_count < static_cast<int>(d.cluster_mixing.size()))
      throw Error("synth: fewer municipalities than clusters in " + d.code);
    const std::size_t blocks = d.cluster_mixing.front().size();
    for (const auto& row : d.cluster_mixing) {
      if (row.size() != blocks) throw Error("synth: ragged cluster_mixing rows");
      double sum = 0;
      for (double w : row) {
        if (w < 0) throw Error("synth: negative mixing weight");
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw Error("synth: cluster mixing weights of " + d.code + " must sum to 1");
    }
  }
  if (!origin_overrides.empty() &&
      static_cast<int>(origin_overrides.size()) != origin_count)
    throw Error("synth: origin_overrides must match origin_count");
}

SynthOutput generate(const SynthConfig& config) {
  config.validate();
  SynthOutput out;
  GroundTruth& truth = out.truth;
  truth.seed = config.seed;
  truth.alpha = config.alpha;
  truth.beta_pop = config.beta_pop;
  truth.beta_gdppc = config.beta_gdppc;
  truth.rho_distance = config.rho_distance;
  truth.beta_language = config.beta_language;
  truth.beta_flights = config.beta_flights;
  truth.sigma = config.sigma;
  truth.anchor = config.anchor_industry;
  truth.atm = config.atm_industry;

  Rng rng(config.seed);

  std::vector<std::string> dest_codes;
  for (const auto& d : config.destinations) dest_codes.push_back(d.code);

  // --- origins: codes, attributes, pairwise frictions -----------------
  std::vector<std::string> origin_codes;
  if (config.origin_overrides.empty()) {
    origin_codes = make_origin_codes(config.origin_count, dest_codes);
  } else {
    for (const auto& o : config.origin_overrides) origin_codes.push_back(o.code);
  }
  const int n_origins = static_cast<int>(origin_codes.size());

  std::map<std::string, CountryAttributes> countries;
  std::map<std::pair<std::string, std::string>, PairAttributes> pairs;
  for (int i = 0; i < n_origins; ++i) {
    CountryAttributes c;
    c.iso3 = origin_codes[i];
    c.continent = kContinents[i % 5];
    if (config.origin_overrides.empty()) {
      c.population = rng.lognormal(config.population_median, config.population_log_sigma);
      c.gdp_per_capita = rng.lognormal(config.gdppc_median, config.gdppc_log_sigma);
    } else {
      c.population = config.origin_overrides[i].population;
      c.gdp_per_capita = config.origin_overrides[i].gdp_per_capita;
    }
    c.gdp_total = c.population * c.gdp_per_capita;
    countries[c.iso3] = c;

    for (const auto& dest : dest_codes) {
      PairAttributes p;
      p.origin = c.iso3;
      p.dest = dest;
      if (config.origin_overrides.empty()) {
        p.distance_km = rng.lognormal(config.distance_median, config.distance_log_sigma);
        p.common_language = rng.bernoulli(config.language_probability);
        p.flight_connectivity = rng.bernoulli(config.flights_zero_probability)
                                    ? 0.0
                                    : rng.lognormal(config.flights_median,
                                                    config.flights_log_sigma);
      } else {
        const auto& o = config.origin_overrides[i];
        p.distance_km = o.distance_km;
        p.common_language = o.common_language;
        p.flight_connectivity = o.flight_connectivity;
      }
      pairs[{p.origin, p.dest}] = p;
    }
    truth.origin_block[c.iso3] = 0;  // per-destination blocks set below
  }

  // --- country-level law ----------------------------------------------
  std::map<std::pair<std::string, std::string>, Cents> country_totals;
  for (const auto& origin : origin_codes)
    for (const auto& dest : dest_codes) {
      const CountryAttributes& c = countries[origin];
      const PairAttributes& p = pairs[{origin, dest}];
      double mu = config.alpha + config.beta_pop * std::log(c.population) +
                  config.beta_gdppc * std::log(c.gdp_per_capita) +
                  config.rho_distance * std::log(p.distance_km) +
                  config.beta_language * (p.common_language ? 1.0 : 0.0) +
                  config.beta_flights * std::log1p(p.flight_connectivity);
      if (config.sigma > 0) mu += config.sigma * rng.normal();
      constexpr double kMaxLog = 36.8;  // ~1e16 USD; keeps cents in int64
      if (mu > kMaxLog) mu = kMaxLog;
      truth.log_expenditure[origin + "|" + dest] = mu;
      country_totals[{origin, dest}] =
          static_cast<Cents>(std::llround(std::exp(mu) * 100.0));
    }

  // --- municipality structure per destination --------------------------
  struct DestPlan {
    std::vector<std::string> munis;
    std::vector<int> cluster_of;
    std::vector<double> muni_share_in_cluster;    // s_m / S_cluster
    std::vector<std::vector<double>> quarter_w;   // [muni][quarter], sums to 1
    // [muni][quarter][industry] share within the cell, common to all origins
    std::vector<std::vector<std::vector<double>>> industry_share;
  };
  const int n_industries = static_cast<int>(config.industries.size());
  const int n_quarters = config.quarter_count;
  std::map<std::string, DestPlan> plans;

  for (const auto& d : config.destinations) {
    DestPlan plan;
    const int n_clusters = static_cast<int>(d.cluster_mixing.size());
    std::vector<double> size_factor(d.municipality_count);
    std::vector<double> cluster_size(n_clusters, 0.0);
    for (int m = 0; m < d.municipality_count; ++m) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s-M%03d", d.code.c_str(), m + 1);
      plan.munis.push_back(buf);
      plan.cluster_of.push_back(m % n_clusters);
      size_factor[m] = rng.lognormal(1.0, config.municipality_log_sigma);
      cluster_size[m % n_clusters] += size_factor[m];
      truth.municipality_cluster[buf] = m % n_clusters;
    }
    for (int m = 0; m < d.municipality_count; ++m)
      plan.muni_share_in_cluster.push_back(size_factor[m] / cluster_size[plan.cluster_of[m]]);

    plan.quarter_w.assign(d.municipality_count, std::vector<double>(n_quarters, 0.0));
    for (int m = 0; m < d.municipality_count; ++m) {
      double sum = 0;
      for (int q = 0; q < n_quarters; ++q) {
        plan.quarter_w[m][q] = rng.lognormal(1.0, config.quarter_log_sigma);
        sum += plan.quarter_w[m][q];
      }
      for (int q = 0; q < n_quarters; ++q) plan.quarter_w[m][q] /= sum;
    }

    // Industry mix per cell: a latent anchor factor per (muni, quarter) and
    // per-industry loadings on it.
    plan.industry_share.assign(
        d.municipality_count,
        std::vector<std::vector<double>>(n_quarters, std::vector<double>(n_industries, 0.0)));
    for (int m = 0; m < d.municipality_count; ++m)
      for (int q = 0; q < n_quarters; ++q) {
        const double z = rng.normal();
        double sum = 0;
        for (int i = 0; i < n_industries; ++i) {
          const double lam = config.industries[i].anchor_loading;
          const double eps = rng.normal();
          const double intensity =
              std::exp(lam * z +
                       std::sqrt(std::max(0.0, 1.0 - lam * lam)) * config.industry_noise * eps);
          plan.industry_share[m][q][i] = intensity;
          sum += intensity;
        }
        for (int i = 0; i < n_industries; ++i) plan.industry_share[m][q][i] /= sum;
      }
    plans[d.code] = std::move(plan);
  }

  // --- allocation: cluster preferences then exact apportionment --------
  std::vector<TransactionAggregate> records;
  for (const auto& d : config.destinations) {
    const DestPlan& plan = plans[d.code];
    const int n_clusters = static_cast<int>(d.cluster_mixing.size());
    const int n_blocks = static_cast<int>(d.cluster_mixing.front().size());
    const int n_munis = static_cast<int>(plan.munis.size());

    for (int oi = 0; oi < n_origins; ++oi) {
      const std::string& origin = origin_codes[oi];
      const int block = oi % n_blocks;
      truth.origin_block[origin] = block;

      const Cents total = country_totals[{origin, d.code}];
      if (total <= 0) continue;

      // Dirichlet-like preference over clusters: planted mixing weight with
      // log-normal jitter, normalized.
      std::vector<double> pref(n_clusters);
      double pref_sum = 0;
      for (int cl = 0; cl < n_clusters; ++cl) {
        pref[cl] = d.cluster_mixing[cl][block] *
                   std::exp(config.cluster_noise * rng.normal());
        pref_sum += pref[cl];
      }
      for (double& v : pref) v /= pref_sum;

      std::vector<double> weights;
      weights.reserve(static_cast<std::size_t>(n_munis) * n_quarters * n_industries);
      for (int m = 0; m < n_munis; ++m)
        for (int q = 0; q < n_quarters; ++q)
          for (int i = 0; i < n_industries; ++i)
            weights.push_back(pref[plan.cluster_of[m]] * plan.muni_share_in_cluster[m] *
                              plan.quarter_w[m][q] * plan.industry_share[m][q][i]);

      const std::vector<Cents> cents = apportion(total, weights);
      std::size_t idx = 0;
      for (int m = 0; m < n_munis; ++m)
        for (int q = 0; q < n_quarters; ++q)
          for (int i = 0; i < n_industries; ++i, ++idx) {
            if (cents[idx] <= 0) continue;
            TransactionAggregate r;
            r.origin = origin;
            r.dest_country = d.code;
            r.municipality_id = plan.munis[m];
            r.industry = config.industries[i].name;
            r.quarter = Quarter::from_ordinal(config.first_quarter.ordinal() + q);
            r.usd = cents[idx];
            r.txn_count = 1 + cents[idx] / 7500;  // ~75 USD average ticket
            records.push_back(std::move(r));
          }
    }
  }

  for (const auto& ind : config.industries) {
    truth.industry_class[ind.name] = class_name(ind.planted);
    truth.anchor_loading[ind.name] = ind.anchor_loading;
  }

  out.cube = ExpenditureCube::from_records(std::move(records));
  for (const auto& [iso3, c] : countries) out.countries.push_back(c);
  for (const auto& [key, p] : pairs) out.pairs.push_back(p);

  // Municipality footprints: unit squares on a per-destination grid.
  int dest_idx = 0;
  for (const auto& d : config.destinations) {
    const DestPlan& plan = plans[d.code];
    for (int m = 0; m < static_cast<int>(plan.munis.size()); ++m) {
      MunicipalityGeo g;
      g.municipality_id = plan.munis[m];
      g.dest_country = d.code;
      g.name = d.code + " municipality " + std::to_string(m + 1);
      const double lon = dest_idx * 20.0 + (m % 6);
      const double lat = m / 6;
      nlohmann::json geometry = {
          {"type", "Polygon"},
          {"coordinates",
           {{{lon, lat}, {lon + 0.9, lat}, {lon + 0.9, lat + 0.9}, {lon, lat + 0.9}, {lon, lat}}}}};
      g.geometry_json = geometry.dump();
      out.municipalities.push_back(std::move(g));
    }
    ++dest_idx;
  }
  return out;
}

std::string GroundTruth::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["planted"] = {{"alpha", alpha},
                  {"beta_pop", beta_pop},
                  {"beta_gdppc", beta_gdppc},
                  {"rho_distance", rho_distance},
                  {"beta_language", beta_language},
                  {"beta_flights", beta_flights},
                  {"sigma", sigma}};
  j["anchor"] = anchor;
  j["atm"] = atm;
  j["origin_block"] = origin_block;
  j["municipality_cluster"] = municipality_cluster;
  j["industry_class"] = industry_class;
  j["anchor_loading"] = anchor_loading;
  j["log_expenditure"] = log_expenditure;
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_synth_files(const SynthOutput& output,
                                                     const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<fs::path> written;

  auto emit = [&](const fs::path& name, const std::string& content) {
    atomic_write(out_dir / name, content);
    written.push_back(out_dir / name);
  };

  {
    std::ostringstream f;
    write_transactions(f, output.cube);
    emit("transactions.csv", f.str());
  }
  {
    std::string f = "iso3,population,gdp_per_capita,gdp_total,continent\n";
    for (const auto& c : output.countries)
      f += csv::join_row({c.iso3, fmt_g(c.population), fmt_g(c.gdp_per_capita),
                          fmt_g(c.gdp_total), c.continent}) +
           "\n";
    emit("countries.csv", f);
  }
  {
    std::string f = "origin,dest,distance_km,common_language,flight_connectivity\n";
    for (const auto& p : output.pairs)
      f += csv::join_row({p.origin, p.dest, fmt_g(p.distance_km),
                          p.common_language ? "1" : "0", fmt_g(p.flight_connectivity)}) +
           "\n";
    emit("pairs.csv", f);
  }
  {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& g : output.municipalities) {
      nlohmann::json f;
      f["type"] = "Feature";
      f["properties"] = {{"municipality_id", g.municipality_id},
                         {"dest_country", g.dest_country},
                         {"name", g.name}};
      f["geometry"] = nlohmann::json::parse(g.geometry_json);
      features.push_back(std::move(f));
    }
    nlohmann::json doc = {{"type", "FeatureCollection"}, {"features", features}};
    emit("municipalities.geojson", doc.dump(2) + "\n");
  }
  emit("ground_truth.json", output.truth.to_json());
  return written;
}

}  // namespace tourexp
