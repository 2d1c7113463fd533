#include "tourexp/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tourexp/errors.hpp"

namespace tourexp {

std::size_t EntityVectors::entity_index(const std::string& key) const {
  auto it = std::lower_bound(entities.begin(), entities.end(), key);
  if (it == entities.end() || *it != key) throw Error("unknown entity: '" + key + "'");
  return static_cast<std::size_t>(it - entities.begin());
}

EntityVectors build_entity_vectors(const ExpenditureCube& cube, Axis axis) {
  if (cube.empty()) throw Error("build_entity_vectors: empty cube");
  EntityVectors out;
  out.axis = axis;
  if (axis == Axis::Origin) {
    out.entities = cube.origins();
    out.categories = cube.dest_countries();
  } else {
    out.entities = cube.municipalities();
    out.categories = cube.origins();
  }
  out.values.assign(out.entities.size(),
                    std::vector<double>(out.categories.size(), 0.0));

  const auto dims = axis == Axis::Origin
                        ? std::set<Dim>{Dim::Origin, Dim::DestCountry}
                        : std::set<Dim>{Dim::Origin, Dim::Municipality};
  for (const auto& [key, cents] : aggregate(cube, dims, Measure::Usd)) {
    // Keys come out in canonical dimension order: origin first.
    const std::string& origin = key[0];
    const std::string& other = key[1];
    std::size_t e, c;
    if (axis == Axis::Origin) {
      e = out.entity_index(origin);
      c = static_cast<std::size_t>(
          std::lower_bound(out.categories.begin(), out.categories.end(), other) -
          out.categories.begin());
    } else {
      e = out.entity_index(other);
      c = static_cast<std::size_t>(
          std::lower_bound(out.categories.begin(), out.categories.end(), origin) -
          out.categories.begin());
    }
    out.values[e][c] = usd(cents);
  }
  return out;
}

double SimMatrix::at(const std::string& a, const std::string& b) const {
  auto idx = [&](const std::string& key) {
    auto it = std::lower_bound(entities.begin(), entities.end(), key);
    if (it == entities.end() || *it != key)
      throw Error("similarity: unknown entity '" + key + "'");
    return static_cast<std::size_t>(it - entities.begin());
  };
  return rho[idx(a)][idx(b)];
}

SimMatrix similarity(const EntityVectors& vectors, const SimilarityOptions& opts) {
  if (vectors.entities.size() < 2)
    throw NumericError("similarity: need at least 2 entities");
  if (vectors.categories.size() < 3)
    throw NumericError("similarity: need at least 3 categories to correlate over");

  std::vector<std::vector<double>> transformed;
  std::vector<std::string> kept;
  SimMatrix out;
  for (std::size_t i = 0; i < vectors.entities.size(); ++i) {
    std::vector<double> v = vectors.values[i];
    if (opts.log1p_transform)
      for (double& x : v) x = std::log1p(x);
    const double first = v.empty() ? 0.0 : v.front();
    const bool constant = std::all_of(v.begin(), v.end(), [&](double x) { return x == first; });
    if (constant) {
      out.excluded.push_back(vectors.entities[i]);
      continue;
    }
    kept.push_back(vectors.entities[i]);
    transformed.push_back(std::move(v));
  }
  if (!out.excluded.empty())
    out.warnings.push_back(std::to_string(out.excluded.size()) +
                           " entities excluded (zero variance after transform)");
  if (kept.size() < 2)
    throw NumericError("similarity: fewer than 2 entities with variance");

  const std::size_t n = kept.size();
  out.entities = std::move(kept);
  out.rho.assign(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = pearson_corr(transformed[i], transformed[j]).coefficient;
      out.rho[i][j] = r;
      out.rho[j][i] = r;
    }
  return out;
}

SpaceGraph topk_graph(const SimMatrix& sim, int k,
                      const std::map<std::string, SpaceNode>& node_attrs) {
  const std::size_t n = sim.entities.size();
  if (k < 1) throw Error("topk_graph: k must be >= 1");
  if (static_cast<std::size_t>(k) >= n)
    throw Error("topk_graph: k must be smaller than the entity count");

  SpaceGraph graph;
  graph.k = k;
  for (const auto& key : sim.entities) {
    auto it = node_attrs.find(key);
    SpaceNode node = it != node_attrs.end() ? it->second : SpaceNode{};
    node.key = key;
    if (node.country.empty()) node.country = key;
    graph.nodes.push_back(std::move(node));
  }

  std::set<std::pair<std::string, std::string>> chosen;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) order.push_back(j);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (sim.rho[i][a] != sim.rho[i][b]) return sim.rho[i][a] > sim.rho[i][b];
      return sim.entities[a] < sim.entities[b];  // tie at the k-th rank
    });
    for (int t = 0; t < k; ++t) {
      const std::size_t j = order[static_cast<std::size_t>(t)];
      chosen.insert(std::minmax(sim.entities[i], sim.entities[j]));
    }
  }
  for (const auto& [a, b] : chosen)
    graph.edges.push_back({a, b, sim.at(a, b)});
  return graph;
}

std::map<std::string, std::map<std::string, double>> attractiveness_by_dest(
    const ExpenditureCube& cube, const AttributeSet& attrs) {
  std::map<std::string, std::map<std::string, double>> out;
  const auto totals = aggregate(cube, {Dim::Origin, Dim::DestCountry}, Measure::Usd);
  for (const auto& [key, cents] : totals) {
    const CountryAttributes* country = attrs.country(key[0]);
    if (!country || country->gdp_total <= 0) continue;
    out[key[1]][key[0]] = usd(cents) / country->gdp_total;
  }
  for (auto& [dest, shares] : out) {
    double sum = 0;
    for (const auto& [origin, v] : shares) sum += v;
    if (sum > 0)
      for (auto& [origin, v] : shares) v /= sum;
  }
  return out;
}

Prediction predict_expenditure(const SimMatrix& sim, const Panel& expenditure,
                               const std::string& dest) {
  Prediction out;
  const std::size_t n = sim.entities.size();
  std::vector<double> e(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = expenditure.find({sim.entities[i], dest});
    if (it != expenditure.end()) e[i] = it->second;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double num = 0, den = 0;
    std::size_t contributors = 0, last = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = sim.rho[i][j];
      if (w <= 0) continue;  // negative similarities are excluded by policy
      num += w * e[j];
      den += w;
      ++contributors;
      last = j;
    }
    if (contributors == 1)
      out.value[sim.entities[i]] = e[last];  // weight cancels exactly
    else if (den > 0)
      out.value[sim.entities[i]] = num / den;
    else
      out.undefined.push_back(sim.entities[i]);
  }
  return out;
}

Panel usd_panel(const ExpenditureCube& cube, const QuarterWindow& window) {
  Panel out;
  for (const auto& r : cube.records()) {
    if (!window.contains(r.quarter)) continue;
    out[{r.origin, r.dest_country}] += usd(r.usd);
  }
  return out;
}

namespace {

FitResult fit_panel_fe(const std::vector<PanelKey>& keys,
                       const std::vector<double>& response,
                       const std::vector<std::pair<std::string, std::vector<double>>>& columns) {
  std::set<std::string> origins, dests;
  DesignMatrix design;
  design.response = response;
  for (const auto& [name, values] : columns) design.add_column(name, values);
  FEGroup origin_fe{"origin", {}}, dest_fe{"destination", {}};
  for (const auto& [origin, dest] : keys) {
    origin_fe.labels.push_back(origin);
    dest_fe.labels.push_back(dest);
    origins.insert(origin);
    dests.insert(dest);
  }
  if (origins.size() < 2 || dests.size() < 2)
    throw NumericError("panel fit needs at least 2 origins and 2 destinations");
  design.fe_groups = {std::move(origin_fe), std::move(dest_fe)};
  return fe_ols_fit(design);
}

}  // namespace

FitResult fit_level_model(const Panel& expenditure, const Panel& prediction) {
  std::vector<PanelKey> keys;
  std::vector<double> y, x;
  for (const auto& [key, e] : expenditure) {
    auto it = prediction.find(key);
    if (it == prediction.end()) continue;  // undefined prediction: row dropped
    keys.push_back(key);
    y.push_back(std::log1p(e));
    x.push_back(std::log1p(it->second));
  }
  return fit_panel_fe(keys, y, {{"log_prediction", x}});
}

FitResult fit_growth_model(const Panel& expenditure_t, const Panel& expenditure_t1,
                           const Panel& prediction_t) {
  std::vector<PanelKey> keys;
  std::vector<double> y, x_level, x_pred;
  for (const auto& [key, e_next] : expenditure_t1) {
    auto e_it = expenditure_t.find(key);
    auto p_it = prediction_t.find(key);
    if (e_it == expenditure_t.end() || p_it == prediction_t.end()) continue;
    keys.push_back(key);
    y.push_back(std::log1p(e_next));
    x_level.push_back(std::log1p(e_it->second));
    x_pred.push_back(std::log1p(p_it->second));
  }
  return fit_panel_fe(keys, y,
                      {{"log_level", x_level}, {"log_prediction", x_pred}});
}

ClusterTable origin_relative_expenditure(
    const ExpenditureCube& cube, const std::map<std::string, int>& cluster_of,
    const std::string& dest, const std::map<std::string, CountryAttributes>* countries) {
  const ExpenditureCube sub = cube.restrict_dest(dest);
  if (sub.empty()) throw Error("no expenditure for destination " + dest);
  for (const auto& muni : sub.municipalities())
    if (!cluster_of.count(muni))
      throw Error("partition does not cover municipality '" + muni + "'");

  ClusterTable table;
  table.dest = dest;

  std::map<std::string, std::map<int, Cents>> origin_cluster, industry_cluster;
  std::map<std::string, Cents> origin_total, industry_total;
  for (const auto& r : sub.records()) {
    const int cluster = cluster_of.at(r.municipality_id);
    origin_cluster[r.origin][cluster] += r.usd;
    industry_cluster[r.industry][cluster] += r.usd;
    origin_total[r.origin] += r.usd;
    industry_total[r.industry] += r.usd;
  }

  long skipped = 0;
  for (const auto& [origin, total] : origin_total)
    if (total <= 0) ++skipped;
  if (skipped > 0)
    table.warnings.push_back(std::to_string(skipped) +
                             " origins with zero country total excluded");

  auto emit = [](std::vector<ClusterShare>& rows,
                 const std::map<std::string, std::map<int, Cents>>& by_key,
                 const std::map<std::string, Cents>& totals) {
    for (const auto& [key, clusters] : by_key) {
      const Cents total = totals.at(key);
      if (total <= 0) continue;
      for (const auto& [cluster, cents] : clusters) {
        ClusterShare s;
        s.cluster = cluster;
        s.key = key;
        s.usd = cents;
        s.share = static_cast<double>(cents) / static_cast<double>(total);
        rows.push_back(std::move(s));
      }
    }
    std::sort(rows.begin(), rows.end(), [](const ClusterShare& a, const ClusterShare& b) {
      if (a.cluster != b.cluster) return a.cluster < b.cluster;
      if (a.share != b.share) return a.share > b.share;
      return a.key < b.key;
    });
  };
  emit(table.origin_shares, origin_cluster, origin_total);
  emit(table.industry_shares, industry_cluster, industry_total);

  if (countries) {
    for (auto& row : table.origin_shares) {
      auto it = countries->find(row.key);
      if (it != countries->end() && it->second.gdp_total > 0)
        row.usd_per_gdp = usd(row.usd) / it->second.gdp_total;
    }
  }
  return table;
}

}  // namespace tourexp
