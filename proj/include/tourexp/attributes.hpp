#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tourexp/cube.hpp"

namespace tourexp {

struct CountryAttributes {
  std::string iso3;
  double population = 0;       // persons
  double gdp_per_capita = 0;   // USD / person
  double gdp_total = 0;        // USD; checked against population * gdp_per_capita
  std::string continent;       // optional tag, used for graph node colors
};

struct PairAttributes {
  std::string origin;
  std::string dest;
  double distance_km = 0;      // CEPII-style weighted inter-city distance
  bool common_language = false;
  double flight_connectivity = 0;
};

struct MunicipalityGeo {
  std::string municipality_id;
  std::string dest_country;
  std::string name;
  nlohmann::json geometry() const;  // WGS84 polygon or point, kept verbatim
  std::string geometry_json;        // serialized geometry
};

struct AttributeSet {
  std::map<std::string, CountryAttributes> countries;
  // Keyed (origin, dest) as given in the file; lookups fall back to the
  // mirrored ordering.
  std::map<std::pair<std::string, std::string>, PairAttributes> pairs;
  std::vector<MunicipalityGeo> municipalities;
  std::vector<std::string> unmatched_geo;  // geo ids absent from the cube
  std::vector<std::string> warnings;

  const CountryAttributes* country(const std::string& iso3) const;
  const PairAttributes* pair(const std::string& origin, const std::string& dest) const;
};

/// Reads and cross-validates the three attribute files.
///   countries: `iso3,population,gdp_per_capita[,gdp_total][,continent]`
///   pairs:     `origin,dest,distance_km,common_language,flight_connectivity`
///   geo:       GeoJSON FeatureCollection (municipality_id, dest_country, name)
/// Pair rows naming a country missing from the country file, negative
/// distances, or asymmetric duplicate distances raise ParseError. geo_path
/// may be empty. When a cube is supplied, geo features whose municipality_id
/// is not in the cube are listed in unmatched_geo (a flag, not a failure).
AttributeSet parse_attributes(const std::filesystem::path& country_path,
                              const std::filesystem::path& pair_path,
                              const std::filesystem::path& geo_path = {},
                              const ExpenditureCube* cube = nullptr);

}  // namespace tourexp
