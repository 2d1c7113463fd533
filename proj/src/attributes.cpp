#include "tourexp/attributes.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "tourexp/csv.hpp"
#include "tourexp/errors.hpp"

namespace tourexp {

nlohmann::json MunicipalityGeo::geometry() const {
  return nlohmann::json::parse(geometry_json);
}

const CountryAttributes* AttributeSet::country(const std::string& iso3) const {
  auto it = countries.find(iso3);
  return it == countries.end() ? nullptr : &it->second;
}

const PairAttributes* AttributeSet::pair(const std::string& origin,
                                         const std::string& dest) const {
  auto it = pairs.find({origin, dest});
  if (it != pairs.end()) return &it->second;
  it = pairs.find({dest, origin});
  return it == pairs.end() ? nullptr : &it->second;
}

namespace {

double parse_double(const std::string& s, const std::string& at, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ParseError(at + ": malformed " + what + " '" + s + "'");
  }
}

void parse_countries(const std::filesystem::path& path, AttributeSet& out) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open country file: " + path.string());
  csv::Reader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) throw ParseError("empty country file: " + path.string());
  if (header.size() < 3 || header[0] != "iso3" || header[1] != "population" ||
      header[2] != "gdp_per_capita")
    throw ParseError("country header mismatch in " + path.string() +
                     " (expected iso3,population,gdp_per_capita[,gdp_total][,continent])");
  int gdp_total_col = -1, continent_col = -1;
  for (std::size_t i = 3; i < header.size(); ++i) {
    if (header[i] == "gdp_total") gdp_total_col = static_cast<int>(i);
    else if (header[i] == "continent") continent_col = static_cast<int>(i);
    else throw ParseError("unknown country column '" + header[i] + "' in " + path.string());
  }

  std::vector<std::string> row;
  while (reader.next(row)) {
    const std::string at = path.filename().string() + ":" + std::to_string(reader.line_number());
    if (row.size() != header.size())
      throw ParseError(at + ": expected " + std::to_string(header.size()) + " fields");
    CountryAttributes c;
    c.iso3 = row[0];
    c.population = parse_double(row[1], at, "population");
    c.gdp_per_capita = parse_double(row[2], at, "gdp_per_capita");
    if (c.population <= 0) throw ParseError(at + ": population must be positive");
    if (c.gdp_per_capita <= 0) throw ParseError(at + ": gdp_per_capita must be positive");
    double implied = c.population * c.gdp_per_capita;
    if (gdp_total_col >= 0 && !row[gdp_total_col].empty()) {
      c.gdp_total = parse_double(row[gdp_total_col], at, "gdp_total");
      if (std::abs(c.gdp_total - implied) > 0.01 * implied)
        throw ParseError(at + ": gdp_total " + row[gdp_total_col] +
                         " deviates more than 1% from population * gdp_per_capita");
    } else {
      c.gdp_total = implied;
    }
    if (continent_col >= 0) c.continent = row[continent_col];
    if (!out.countries.emplace(c.iso3, c).second)
      throw ParseError(at + ": duplicate country " + c.iso3);
  }
}

void parse_pairs(const std::filesystem::path& path, AttributeSet& out) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open pair file: " + path.string());
  csv::Reader reader(in);
  std::vector<std::string> row;
  const std::vector<std::string> expected = {"origin", "dest", "distance_km",
                                             "common_language", "flight_connectivity"};
  if (!reader.next(row) || row != expected)
    throw ParseError("pair header mismatch in " + path.string() +
                     " (expected origin,dest,distance_km,common_language,flight_connectivity)");

  std::set<std::string> missing;
  while (reader.next(row)) {
    const std::string at = path.filename().string() + ":" + std::to_string(reader.line_number());
    if (row.size() != 5) throw ParseError(at + ": expected 5 fields");
    PairAttributes p;
    p.origin = row[0];
    p.dest = row[1];
    p.distance_km = parse_double(row[2], at, "distance_km");
    if (row[3] == "0" || row[3] == "false") p.common_language = false;
    else if (row[3] == "1" || row[3] == "true") p.common_language = true;
    else throw ParseError(at + ": malformed common_language '" + row[3] + "'");
    p.flight_connectivity = parse_double(row[4], at, "flight_connectivity");
    if (p.origin != p.dest && p.distance_km <= 0)
      throw ParseError(at + ": distance_km must be positive for distinct countries");
    if (p.flight_connectivity < 0)
      throw ParseError(at + ": flight_connectivity must be non-negative");
    if (!out.countries.count(p.origin)) missing.insert(p.origin);

    auto mirrored = out.pairs.find({p.dest, p.origin});
    if (mirrored != out.pairs.end() && mirrored->second.distance_km != p.distance_km)
      throw ParseError(at + ": asymmetric distance for " + p.origin + "-" + p.dest + " (" +
                       std::to_string(p.distance_km) + " vs " +
                       std::to_string(mirrored->second.distance_km) + ")");
    if (!out.pairs.emplace(std::make_pair(p.origin, p.dest), p).second)
      throw ParseError(at + ": duplicate pair " + p.origin + "-" + p.dest);
  }
  if (!missing.empty()) {
    std::string codes;
    for (const auto& c : missing) codes += (codes.empty() ? "" : ", ") + c;
    throw ParseError("pair file references origins missing from the country file: " + codes);
  }
}

void parse_geo(const std::filesystem::path& path, AttributeSet& out,
               const ExpenditureCube* cube) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open geo file: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid GeoJSON in " + path.string() + ": " + e.what());
  }
  if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features"))
    throw ParseError(path.string() + ": expected a GeoJSON FeatureCollection");

  std::set<std::string> seen;
  for (const auto& feature : doc["features"]) {
    const auto& props = feature.at("properties");
    MunicipalityGeo g;
    g.municipality_id = props.value("municipality_id", "");
    g.dest_country = props.value("dest_country", "");
    g.name = props.value("name", "");
    if (g.municipality_id.empty())
      throw ParseError(path.string() + ": feature without municipality_id property");
    if (!seen.insert(g.municipality_id).second)
      throw ParseError(path.string() + ": duplicate municipality_id " + g.municipality_id);
    g.geometry_json = feature.value("geometry", nlohmann::json()).dump();
    if (cube) {
      bool known = std::binary_search(cube->municipalities().begin(),
                                      cube->municipalities().end(), g.municipality_id);
      if (!known) out.unmatched_geo.push_back(g.municipality_id);
    }
    out.municipalities.push_back(std::move(g));
  }
  if (!out.unmatched_geo.empty())
    out.warnings.push_back(std::to_string(out.unmatched_geo.size()) +
                           " geo municipalities not present in the cube");
}

}  // namespace

AttributeSet parse_attributes(const std::filesystem::path& country_path,
                              const std::filesystem::path& pair_path,
                              const std::filesystem::path& geo_path,
                              const ExpenditureCube* cube) {
  AttributeSet out;
  parse_countries(country_path, out);
  parse_pairs(pair_path, out);
  if (!geo_path.empty()) parse_geo(geo_path, out, cube);
  return out;
}

}  // namespace tourexp
