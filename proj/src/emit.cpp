#include "tourexp/emit.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tourexp/csv.hpp"

namespace tourexp::emit {

namespace {

nlohmann::json num_or_null(double v) {
  if (std::isnan(v) || std::isinf(v)) return nullptr;
  return v;
}

}  // namespace

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string stars(double p_value) {
  if (std::isnan(p_value)) return "";
  if (p_value < 0.01) return "***";
  if (p_value < 0.05) return "**";
  if (p_value < 0.1) return "*";
  return "";
}

nlohmann::json fit_result_json(const FitResult& fit,
                               const std::map<std::string, std::string>& metadata) {
  nlohmann::json j;
  j["coefficients"] = nlohmann::json::array();
  for (const auto& c : fit.coefficients)
    j["coefficients"].push_back({{"name", c.name},
                                 {"estimate", num_or_null(c.estimate)},
                                 {"std_error", num_or_null(c.std_error)},
                                 {"t_value", num_or_null(c.t_value)},
                                 {"p_value", num_or_null(c.p_value)},
                                 {"stars", stars(c.p_value)}});
  j["fit"] = {{"n_obs", fit.n_obs},
              {"r_squared", num_or_null(fit.r_squared)},
              {"adj_r_squared", num_or_null(fit.adj_r_squared)},
              {"residual_std_error", num_or_null(fit.residual_std_error)},
              {"df_residual", fit.df_residual},
              {"f_statistic", num_or_null(fit.f_statistic)},
              {"f_p_value", num_or_null(fit.f_p_value)}};
  if (!fit.fe_absorbed.empty()) j["fixed_effects"] = fit.fe_absorbed;
  if (!metadata.empty()) j["metadata"] = metadata;
  return j;
}

std::string fit_result_csv(const FitResult& fit) {
  std::string out = "term,estimate,std_error,t_value,p_value,stars\n";
  for (const auto& c : fit.coefficients)
    out += csv::join_row({c.name, num(c.estimate), num(c.std_error), num(c.t_value),
                          num(c.p_value), stars(c.p_value)}) +
           "\n";
  out += csv::join_row({"n_obs", std::to_string(fit.n_obs), "", "", "", ""}) + "\n";
  out += csv::join_row({"r_squared", num(fit.r_squared), "", "", "", ""}) + "\n";
  out += csv::join_row({"adj_r_squared", num(fit.adj_r_squared), "", "", "", ""}) + "\n";
  out += csv::join_row({"residual_std_error", num(fit.residual_std_error), "", "", "", ""}) + "\n";
  out += csv::join_row({"f_statistic", num(fit.f_statistic), "", "",
                        num(fit.f_p_value), stars(fit.f_p_value)}) +
         "\n";
  for (const auto& [group, levels] : fit.fe_absorbed)
    out += csv::join_row({"fe:" + group, std::to_string(levels), "", "", "", ""}) + "\n";
  return out;
}

std::string ranked_shares_csv(const RankedShares& shares) {
  std::string out = "rank," + shares.axis + ",usd,share,denominator\n";
  long rank = 1;
  for (const auto& e : shares.entries) {
    const bool is_atm = shares.atm_key && e.key == *shares.atm_key;
    out += csv::join_row({std::to_string(rank++), e.key, format_usd(e.usd), num(e.share),
                          is_atm ? "total" : (shares.atm_key ? "non-atm" : "total")}) +
           "\n";
  }
  return out;
}

std::string rank_distribution_csv(const RankDistribution& dist) {
  std::string out = "rank,normalized_expenditure\n";
  for (std::size_t i = 0; i < dist.curve.size(); ++i)
    out += std::to_string(i + 1) + "," + num(dist.curve[i]) + "\n";
  return out;
}

nlohmann::json rank_distribution_json(const RankDistribution& dist) {
  nlohmann::json j;
  j["curve"] = dist.curve;
  j["p75_p25_ratio"] =
      dist.p75_p25_ratio ? nlohmann::json(*dist.p75_p25_ratio) : nlohmann::json();
  j["percentile_method"] = dist.percentile_method;
  return j;
}

std::string timeline_csv(const std::map<Quarter, std::int64_t>& totals, Measure measure) {
  std::string out = measure == Measure::Usd ? "quarter,usd\n" : "quarter,txn_count\n";
  for (const auto& [q, v] : totals)
    out += q.str() + "," + (measure == Measure::Usd ? format_usd(v) : std::to_string(v)) + "\n";
  return out;
}

std::string seasonal_csv(const SeasonalBalance& balance) {
  std::string out = "municipality_id,q1_usd,q3_usd,balance,gray\n";
  for (const auto& e : balance.entries)
    out += csv::join_row({e.municipality_id, format_usd(e.q1), format_usd(e.q3),
                          num(e.balance), e.gray ? "1" : "0"}) +
           "\n";
  return out;
}

std::string partition_csv(const std::map<std::string, int>& cluster_of) {
  std::string out = "municipality_id,cluster\n";
  for (const auto& [muni, cluster] : cluster_of)
    out += csv::join_row({muni, std::to_string(cluster)}) + "\n";
  return out;
}

namespace {

std::string cluster_csv(const std::vector<ClusterShare>& rows, const char* key_name,
                        double min_usd, bool with_gdp) {
  std::string out = std::string("cluster,") + key_name + ",usd,share" +
                    (with_gdp ? ",usd_per_gdp" : "") + "\n";
  for (const auto& r : rows) {
    if (usd(r.usd) < min_usd) continue;
    std::vector<std::string> fields{std::to_string(r.cluster), r.key, format_usd(r.usd),
                                    num(r.share)};
    if (with_gdp) fields.push_back(r.usd_per_gdp > 0 ? num(r.usd_per_gdp) : "");
    out += csv::join_row(fields) + "\n";
  }
  return out;
}

}  // namespace

std::string cluster_origins_csv(const ClusterTable& table, double min_usd) {
  bool with_gdp = false;
  for (const auto& r : table.origin_shares) with_gdp = with_gdp || r.usd_per_gdp > 0;
  return cluster_csv(table.origin_shares, "origin", min_usd, with_gdp);
}

std::string cluster_industries_csv(const ClusterTable& table, double min_usd) {
  return cluster_csv(table.industry_shares, "industry", min_usd, false);
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string graphml(const SpaceGraph& graph) {
  // Collect the attractiveness keys present on any node.
  std::set<std::string> dests;
  for (const auto& n : graph.nodes)
    for (const auto& [dest, v] : n.attractiveness) dests.insert(dest);

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"country\" for=\"node\" attr.name=\"country\" attr.type=\"string\"/>\n"
      << "  <key id=\"continent\" for=\"node\" attr.name=\"continent\" attr.type=\"string\"/>\n";
  int key_id = 0;
  std::map<std::string, std::string> dest_key;
  for (const auto& dest : dests) {
    dest_key[dest] = "attr" + std::to_string(key_id++);
    out << "  <key id=\"" << dest_key[dest] << "\" for=\"node\" attr.name=\"attractiveness_"
        << xml_escape(dest) << "\" attr.type=\"double\"/>\n";
  }
  out << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
      << "  <graph id=\"G\" edgedefault=\"undirected\">\n";
  for (const auto& n : graph.nodes) {
    out << "    <node id=\"" << xml_escape(n.key) << "\">\n"
        << "      <data key=\"country\">" << xml_escape(n.country) << "</data>\n"
        << "      <data key=\"continent\">" << xml_escape(n.continent) << "</data>\n";
    for (const auto& [dest, v] : n.attractiveness)
      out << "      <data key=\"" << dest_key[dest] << "\">" << num(v) << "</data>\n";
    out << "    </node>\n";
  }
  int edge_id = 0;
  for (const auto& e : graph.edges)
    out << "    <edge id=\"e" << edge_id++ << "\" source=\"" << xml_escape(e.a)
        << "\" target=\"" << xml_escape(e.b) << "\">\n"
        << "      <data key=\"weight\">" << num(e.weight) << "</data>\n"
        << "    </edge>\n";
  out << "  </graph>\n</graphml>\n";
  return out.str();
}

std::string dot(const SpaceGraph& graph) {
  std::ostringstream out;
  out << "graph space {\n";
  for (const auto& n : graph.nodes) {
    out << "  \"" << n.key << "\" [continent=\"" << n.continent << "\"";
    for (const auto& [dest, v] : n.attractiveness)
      out << " attractiveness_" << dest << "=" << num(v);
    out << "];\n";
  }
  for (const auto& e : graph.edges)
    out << "  \"" << e.a << "\" -- \"" << e.b << "\" [weight=" << num(e.weight) << "];\n";
  out << "}\n";
  return out.str();
}

std::string predictions_csv(const Panel& expenditure, const Prediction& prediction,
                            const std::string& dest) {
  std::set<std::string> origins;
  for (const auto& [key, v] : prediction.value) origins.insert(key);
  for (const auto& o : prediction.undefined) origins.insert(o);

  std::string out = "origin,expenditure_usd,predicted_usd,defined\n";
  for (const auto& origin : origins) {
    auto e_it = expenditure.find({origin, dest});
    const double e = e_it == expenditure.end() ? 0.0 : e_it->second;
    auto p_it = prediction.value.find(origin);
    if (p_it != prediction.value.end())
      out += csv::join_row({origin, num(e), num(p_it->second), "1"}) + "\n";
    else
      out += csv::join_row({origin, num(e), "", "0"}) + "\n";
  }
  return out;
}

nlohmann::json geojson_with_properties(
    const std::vector<MunicipalityGeo>& municipalities, const std::string& dest,
    const std::map<std::string, std::map<std::string, nlohmann::json>>& extra) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& g : municipalities) {
    if (!dest.empty() && g.dest_country != dest) continue;
    nlohmann::json f;
    f["type"] = "Feature";
    nlohmann::json props = {{"municipality_id", g.municipality_id},
                            {"dest_country", g.dest_country},
                            {"name", g.name}};
    auto it = extra.find(g.municipality_id);
    if (it != extra.end())
      for (const auto& [key, value] : it->second) props[key] = value;
    f["properties"] = std::move(props);
    f["geometry"] = nlohmann::json::parse(g.geometry_json);
    features.push_back(std::move(f));
  }
  return nlohmann::json{{"type", "FeatureCollection"}, {"features", features}};
}

}  // namespace tourexp::emit
