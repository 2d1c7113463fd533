#include "tourexp/gravity.hpp"

#include <cmath>

#include "tourexp/errors.hpp"

namespace tourexp {

GravitySpec GravitySpec::from_model_number(int model) {
  if (model < 1 || model > 4) throw Error("gravity model number must be 1..4");
  GravitySpec spec;
  spec.include_language = spec.include_flights = (model == 2 || model == 4);
  return spec;
}

std::string GravitySpec::label() const {
  return include_language || include_flights ? "distance+language+flights" : "distance-only";
}

GravityDataset build_gravity_rows(const ExpenditureCube& cube, const AttributeSet& attrs,
                                  const std::string& dest) {
  GravityDataset data;
  data.dest = dest;

  const auto totals = aggregate(cube.restrict_dest(dest), {Dim::Origin}, Measure::Usd);
  for (const auto& [key, cents] : totals) {
    const std::string& origin = key[0];
    if (cents <= 0) {
      ++data.dropped_zero_expenditure;
      continue;
    }
    const CountryAttributes* country = attrs.country(origin);
    const PairAttributes* pair = attrs.pair(origin, dest);
    if (!country || !pair) {
      ++data.dropped_missing_attributes;
      data.warnings.push_back("origin " + origin + " dropped: missing " +
                              (country ? "pair" : "country") + " attributes");
      continue;
    }
    GravityRow row;
    row.origin = origin;
    row.log_expenditure = std::log(usd(cents));
    row.log_population = std::log(country->population);
    row.log_gdp_per_capita = std::log(country->gdp_per_capita);
    row.log_distance = std::log(pair->distance_km);
    row.common_language = pair->common_language ? 1.0 : 0.0;
    row.log_flights = std::log1p(pair->flight_connectivity);
    if (!std::isfinite(row.log_expenditure) || !std::isfinite(row.log_distance))
      throw NumericError("non-finite gravity regressor for origin " + origin);
    data.rows.push_back(std::move(row));
  }
  if (data.rows.empty())
    throw Error("no origins with expenditure and attributes for destination " + dest);
  return data;
}

FitResult fit_gravity_model(const GravityDataset& data, const GravitySpec& spec) {
  const std::size_t n = data.rows.size();
  DesignMatrix design;
  design.response.reserve(n);
  std::vector<double> pop(n), gdppc(n), dist(n), lang(n), flights(n);
  for (std::size_t i = 0; i < n; ++i) {
    const GravityRow& r = data.rows[i];
    design.response.push_back(r.log_expenditure);
    pop[i] = r.log_population;
    gdppc[i] = r.log_gdp_per_capita;
    dist[i] = r.log_distance;
    lang[i] = r.common_language;
    flights[i] = r.log_flights;
  }
  design.add_column("log_pop", std::move(pop));
  design.add_column("log_gdppc", std::move(gdppc));
  design.add_column("log_distance", std::move(dist));
  if (spec.include_language) design.add_column("common_language", std::move(lang));
  if (spec.include_flights) design.add_column("log_flights", std::move(flights));

  const long needed = static_cast<long>(design.columns.size()) + 2;
  if (static_cast<long>(n) < needed)
    throw NumericError("gravity fit needs at least " + std::to_string(needed) + " origins, got " +
                       std::to_string(n));
  return ols_fit(design, /*intercept=*/true);
}

}  // namespace tourexp
