#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tourexp/attributes.hpp"
#include "tourexp/cube.hpp"
#include "tourexp/stats.hpp"

namespace tourexp {

enum class Axis { Origin, Destination };

/// Per-entity expenditure vectors: origins over destination countries, or
/// destination municipalities over origin countries. Entries are USD totals
/// summed over every other dimension.
struct EntityVectors {
  Axis axis = Axis::Origin;
  std::vector<std::string> entities;    // sorted
  std::vector<std::string> categories;  // sorted, shared ordering
  std::vector<std::vector<double>> values;  // [entity][category], USD

  std::size_t entity_index(const std::string& key) const;
};

EntityVectors build_entity_vectors(const ExpenditureCube& cube, Axis axis);

/// Symmetric pairwise similarity with unit diagonal. Entities whose
/// transformed vector has zero variance are excluded with a warning.
struct SimMatrix {
  std::vector<std::string> entities;
  std::vector<std::vector<double>> rho;
  std::vector<std::string> excluded;
  std::vector<std::string> warnings;

  double at(const std::string& a, const std::string& b) const;
};

struct SimilarityOptions {
  /// Correlate ln(1+USD) rather than raw USD; the raw switch exists for
  /// sensitivity runs.
  bool log1p_transform = true;
};

SimMatrix similarity(const EntityVectors& vectors, const SimilarityOptions& opts = {});

/// Node metadata carried into graph emission.
struct SpaceNode {
  std::string key;
  std::string country;
  std::string continent;
  /// Share of the destination's expenditure relative to origin GDP,
  /// normalized to sum 1 across origins, keyed by destination.
  std::map<std::string, double> attractiveness;
};

struct SpaceEdge {
  std::string a, b;  // a < b
  double weight = 0;
};

struct SpaceGraph {
  std::vector<SpaceNode> nodes;  // sorted by key
  std::vector<SpaceEdge> edges;  // sorted by (a, b)
  int k = 0;
};

/// Union of every node's k most similar partners (so nodes can end up with
/// more than k connections). Ties at the k-th rank break by ascending key;
/// identical inputs give byte-identical edge lists.
SpaceGraph topk_graph(const SimMatrix& sim, int k,
                      const std::map<std::string, SpaceNode>& node_attrs = {});

/// dest -> origin -> (USD in dest / origin GDP), normalized per destination.
std::map<std::string, std::map<std::string, double>> attractiveness_by_dest(
    const ExpenditureCube& cube, const AttributeSet& attrs);

/// Similarity-weighted average of the other origins' expenditures.
/// Negative similarities are excluded from both sums; origins whose
/// included weights sum to zero are reported undefined.
struct Prediction {
  std::map<std::string, double> value;     // origin -> predicted USD
  std::vector<std::string> undefined;      // origins with no positive weights
};

using PanelKey = std::pair<std::string, std::string>;  // (origin, dest)
using Panel = std::map<PanelKey, double>;              // USD totals

Prediction predict_expenditure(const SimMatrix& sim, const Panel& expenditure,
                               const std::string& dest);

/// Per-(origin, dest) USD totals within a quarter window.
Panel usd_panel(const ExpenditureCube& cube, const QuarterWindow& window);

/// ln(E+1) = a + b ln(P+1) + origin FE + destination FE.
FitResult fit_level_model(const Panel& expenditure, const Panel& prediction);

/// ln(E_t1+1) = a + b1 ln(E_t+1) + b2 ln(P_t+1) + origin FE + destination FE.
FitResult fit_growth_model(const Panel& expenditure_t, const Panel& expenditure_t1,
                           const Panel& prediction_t);

/// Origin Relative Expenditure per destination cluster: USD spent in the
/// cluster divided by USD spent in the whole country, for origins and for
/// industries.
struct ClusterShare {
  int cluster = 0;
  std::string key;       // origin or industry
  Cents usd = 0;         // spend inside the cluster
  double share = 0;      // of the key's country total
  double usd_per_gdp = 0;  // only for origins and only when GDP was supplied
};

struct ClusterTable {
  std::string dest;
  std::vector<ClusterShare> origin_shares;    // sorted by (cluster, -share, key)
  std::vector<ClusterShare> industry_shares;  // same ordering
  std::vector<std::string> warnings;
};

/// `cluster_of` must cover every municipality of `dest` present in the cube.
/// When country attributes are given, origin rows also carry spend / GDP.
ClusterTable origin_relative_expenditure(
    const ExpenditureCube& cube, const std::map<std::string, int>& cluster_of,
    const std::string& dest,
    const std::map<std::string, CountryAttributes>* countries = nullptr);

}  // namespace tourexp
